//! Command line front end: pick a sweep, layer config file and overrides,
//! emit a table to stdout or a file.

use clap::{Parser, Subcommand};
use msi_optomech::config::{load_config, parse_override};
use msi_optomech::sweep;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "msi-optomech", version, about = "Sweeps for a signal-recycled interferometer with a movable membrane")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Config file with one `key = value` per line (`#` comments allowed)
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override a config key, e.g. `--set op.power=0.1` (repeatable)
    #[arg(long, global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Write the table to a file instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Output format
    #[arg(long, global = true, value_name = "csv|json")]
    format: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Effective quality factor and damping over a detuning grid
    SweepDetuning,
    /// Cooling versus input power at fixed detuning
    SweepPower,
    /// Cavity response versus membrane position at fixed mirror
    SweepMembrane,
    /// Transmission resonance versus recycling mirror displacement
    SweepSrm,
    /// Coupling rates over one membrane position period
    Couplings,
    /// Displacement noise spectrum around the mechanical resonance
    Spectrum,
}

impl Command {
    fn kind(&self) -> &'static str {
        match self {
            Command::SweepDetuning => "detuning",
            Command::SweepPower => "power",
            Command::SweepMembrane => "membrane",
            Command::SweepSrm => "srm",
            Command::Couplings => "couplings",
            Command::Spectrum => "spectrum",
        }
    }
}

fn run(cli: &Cli) -> msi_optomech::Result<()> {
    let mut overrides = Vec::with_capacity(cli.set.len() + 3);
    for s in &cli.set {
        overrides.push(parse_override(s)?);
    }
    // The subcommand decides the sweep; flags win over file and --set.
    overrides.push(("sweep.kind".into(), cli.command.kind().into()));
    if let Some(out) = &cli.out {
        overrides.push(("output.path".into(), out.display().to_string()));
    }
    if let Some(format) = &cli.format {
        overrides.push(("output.format".into(), format.clone()));
    }
    let cfg = load_config(cli.config.as_deref(), &overrides)?;
    let table = sweep::run(&cfg)?;
    match &cfg.output.path {
        Some(path) => table.write_file(path.as_ref(), cfg.output.format)?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(table.render(cfg.output.format).as_bytes())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
