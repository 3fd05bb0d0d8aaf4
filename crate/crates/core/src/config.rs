//! Run configuration: flat dotted-key text files plus inline overrides.
//!
//! Every key is listed in [`RunConfig::apply`]; unknown keys are rejected
//! with the offending key named. Defaults reproduce the reference setup.

use crate::cavity::DarkFringeBranch;
use crate::params::{MechanicalParams, OpticalParams};
use crate::table::OutputFormat;
use crate::{Error, Result};
use std::f64::consts::PI;
use std::path::Path;

/// Which quantity a sweep varies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepKind {
    /// Total detuning in units of the half-linewidth at the operating x0.
    Detuning,
    /// Input power in W.
    Power,
    /// Membrane position in m.
    Membrane,
    /// Recycling mirror displacement in m.
    Srm,
    /// Coupling rates over membrane position in m.
    Couplings,
    /// Displacement noise over sideband frequency in Hz.
    Spectrum,
}

impl std::str::FromStr for SweepKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "detuning" => SweepKind::Detuning,
            "power" => SweepKind::Power,
            "membrane" => SweepKind::Membrane,
            "srm" => SweepKind::Srm,
            "couplings" => SweepKind::Couplings,
            "spectrum" => SweepKind::Spectrum,
            other => {
                return Err(Error::Config(format!(
                    "unknown sweep kind '{other}' (expected detuning, power, membrane, srm, couplings or spectrum)"
                )))
            }
        })
    }
}

impl SweepKind {
    pub fn name(self) -> &'static str {
        match self {
            SweepKind::Detuning => "detuning",
            SweepKind::Power => "power",
            SweepKind::Membrane => "membrane",
            SweepKind::Srm => "srm",
            SweepKind::Couplings => "couplings",
            SweepKind::Spectrum => "spectrum",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum GridScale {
    #[default]
    Linear,
    Log,
}

impl std::str::FromStr for GridScale {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(GridScale::Linear),
            "log" => Ok(GridScale::Log),
            other => Err(Error::Config(format!(
                "unknown grid scale '{other}' (expected linear or log)"
            ))),
        }
    }
}

/// Sweep grid specification; unset fields fall back to per-kind defaults.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SweepSpec {
    pub kind: Option<SweepKind>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub count: Option<usize>,
    pub scale: Option<GridScale>,
}

/// How the operating membrane position is chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum PositionSpec {
    /// Dark port of the configured branch.
    #[default]
    DarkPort,
    /// Absolute position in m.
    Absolute(f64),
    /// Fraction of the transmitted-power peak on the flank walked from
    /// the dark port (1.0 is the peak itself).
    PeakFraction(f64),
}

/// How the cavity is detuned at the operating point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DriveSpec {
    /// Total detuning in rad/s.
    TotalDetuning(f64),
    /// Recycling mirror displacement in m.
    SrmDisplacement(f64),
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct OperatingSpec {
    pub position: PositionSpec,
    /// None lets the sweep pick its natural default.
    pub drive: Option<DriveSpec>,
    /// Input power in W.
    pub power: f64,
    pub branch: DarkFringeBranch,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct OutputSpec {
    pub format: OutputFormat,
    pub path: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub optics: OpticalParams,
    pub mech: MechanicalParams,
    pub operating: OperatingSpec,
    pub sweep: SweepSpec,
    pub output: OutputSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            optics: OpticalParams::reference(),
            mech: MechanicalParams::reference(),
            operating: OperatingSpec {
                power: 0.02,
                ..OperatingSpec::default()
            },
            sweep: SweepSpec::default(),
            output: OutputSpec::default(),
        }
    }
}

impl RunConfig {
    /// Apply one `key = value` assignment.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |what: &str| Error::Config(format!("key '{key}': {what} (got '{value}')"));
        let num = |unit: &str| -> Result<f64> {
            value
                .parse::<f64>()
                .map_err(|_| bad(&format!("expected a number in {unit}")))
        };
        match key {
            "optics.membrane_refl_sq" => {
                let r = unit_interval(key, num("power reflectivity")?)?;
                self.optics.membrane_refl = r.sqrt();
                self.optics.membrane_trans = (1.0 - r).sqrt();
            }
            "optics.bs_refl_sq" => {
                let r = unit_interval(key, num("power reflectivity")?)?;
                self.optics.bs_refl = r.sqrt();
                self.optics.bs_trans = (1.0 - r).sqrt();
            }
            "optics.srm_refl_sq" => {
                self.optics.srm_refl = unit_interval(key, num("power reflectivity")?)?.sqrt();
            }
            "optics.srm_trans_sq" => {
                self.optics.srm_trans = unit_interval(key, num("power transmission")?)?.sqrt();
            }
            "optics.loss_sq" => {
                self.optics.srm_loss_sq = unit_interval(key, num("power loss")?)?;
            }
            "optics.wavelength" => self.optics.wavelength = num("m")?,
            "optics.arm_length" => self.optics.arm_length = num("m")?,
            "optics.diag_length" => self.optics.diag_length = num("m")?,
            "optics.srm_distance" => self.optics.srm_distance = num("m")?,
            "mech.frequency_hz" => self.mech.frequency = 2.0 * PI * num("Hz")?,
            "mech.quality" => self.mech.quality = num("dimensionless")?,
            "mech.mass" => self.mech.mass = num("kg")?,
            "mech.bath_temperature" => self.mech.bath_temperature = num("K")?,
            "op.position" => {
                self.operating.position = if value == "dark-port" {
                    PositionSpec::DarkPort
                } else {
                    PositionSpec::Absolute(num("m, or 'dark-port'")?)
                };
            }
            "op.peak_fraction" => {
                let f = num("fraction of the transmission peak")?;
                if !(f > 0.0 && f <= 1.0) {
                    return Err(bad("fraction must lie in (0, 1]"));
                }
                self.operating.position = PositionSpec::PeakFraction(f);
            }
            "op.detuning" => {
                self.operating.drive = Some(DriveSpec::TotalDetuning(num("rad/s")?));
            }
            "op.srm_displacement" => {
                self.operating.drive = Some(DriveSpec::SrmDisplacement(num("m")?));
            }
            "op.power" => self.operating.power = num("W")?,
            "op.branch" => {
                self.operating.branch = match value {
                    "lower" => DarkFringeBranch::Lower,
                    "upper" => DarkFringeBranch::Upper,
                    _ => return Err(bad("expected lower or upper")),
                };
            }
            "sweep.kind" => self.sweep.kind = Some(value.parse()?),
            "sweep.start" => self.sweep.start = Some(num("sweep units")?),
            "sweep.stop" => self.sweep.stop = Some(num("sweep units")?),
            "sweep.count" => {
                self.sweep.count = Some(
                    value
                        .parse::<usize>()
                        .map_err(|_| bad("expected a positive integer"))?,
                );
            }
            "sweep.scale" => self.sweep.scale = Some(value.parse()?),
            "output.format" => self.output.format = value.parse()?,
            "output.path" => self.output.path = Some(value.to_string()),
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Structural checks; parameter physics is validated separately.
    pub fn validate(&self) -> Result<()> {
        self.optics.validate().map_err(config_wrap)?;
        self.mech.validate().map_err(config_wrap)?;
        if !(self.operating.power >= 0.0 && self.operating.power.is_finite()) {
            return Err(Error::Config("op.power must be non-negative".into()));
        }
        if let Some(count) = self.sweep.count {
            if count < 2 {
                return Err(Error::Config(format!(
                    "sweep.count = {count}: a grid needs at least 2 points"
                )));
            }
        }
        if let (Some(start), Some(stop)) = (self.sweep.start, self.sweep.stop) {
            if start == stop {
                return Err(Error::Config("sweep.start and sweep.stop must differ".into()));
            }
            if self.sweep.scale == Some(GridScale::Log) && (start <= 0.0 || stop <= 0.0) {
                return Err(Error::Config(
                    "log grids need strictly positive endpoints".into(),
                ));
            }
        }
        Ok(())
    }

    /// Fully resolved key-value view, echoed into output metadata.
    pub fn resolved_entries(&self) -> Vec<(String, String)> {
        let o = &self.optics;
        let m = &self.mech;
        let f = |v: f64| format!("{v:?}");
        let mut out = vec![
            ("optics.membrane_refl_sq".into(), f(o.membrane_refl * o.membrane_refl)),
            ("optics.bs_refl_sq".into(), f(o.bs_refl * o.bs_refl)),
            ("optics.srm_refl_sq".into(), f(o.srm_refl * o.srm_refl)),
            ("optics.srm_trans_sq".into(), f(o.srm_trans * o.srm_trans)),
            ("optics.loss_sq".into(), f(o.srm_loss_sq)),
            ("optics.wavelength".into(), f(o.wavelength)),
            ("optics.arm_length".into(), f(o.arm_length)),
            ("optics.diag_length".into(), f(o.diag_length)),
            ("optics.srm_distance".into(), f(o.srm_distance)),
            ("mech.frequency_hz".into(), f(m.frequency / (2.0 * PI))),
            ("mech.quality".into(), f(m.quality)),
            ("mech.mass".into(), f(m.mass)),
            ("mech.bath_temperature".into(), f(m.bath_temperature)),
            (
                "op.position".into(),
                match self.operating.position {
                    PositionSpec::DarkPort => "dark-port".into(),
                    PositionSpec::Absolute(x) => f(x),
                    PositionSpec::PeakFraction(frac) => format!("peak-fraction {}", f(frac)),
                },
            ),
            ("op.power".into(), f(self.operating.power)),
            (
                "op.branch".into(),
                match self.operating.branch {
                    DarkFringeBranch::Lower => "lower".into(),
                    DarkFringeBranch::Upper => "upper".into(),
                },
            ),
        ];
        match self.operating.drive {
            Some(DriveSpec::TotalDetuning(d)) => out.push(("op.detuning".into(), f(d))),
            Some(DriveSpec::SrmDisplacement(d)) => {
                out.push(("op.srm_displacement".into(), f(d)))
            }
            None => {}
        }
        if let Some(kind) = self.sweep.kind {
            out.push(("sweep.kind".into(), kind.name().into()));
        }
        if let Some(v) = self.sweep.start {
            out.push(("sweep.start".into(), f(v)));
        }
        if let Some(v) = self.sweep.stop {
            out.push(("sweep.stop".into(), f(v)));
        }
        if let Some(v) = self.sweep.count {
            out.push(("sweep.count".into(), v.to_string()));
        }
        if let Some(v) = self.sweep.scale {
            out.push((
                "sweep.scale".into(),
                match v {
                    GridScale::Linear => "linear".into(),
                    GridScale::Log => "log".into(),
                },
            ));
        }
        out
    }
}

fn config_wrap(e: Error) -> Error {
    match e {
        Error::InvalidParams(msg) => Error::Config(msg),
        other => other,
    }
}

fn unit_interval(key: &str, v: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(Error::Config(format!("key '{key}': {v} is outside [0, 1]")))
    }
}

/// Split an inline `key=value` override.
pub fn parse_override(s: &str) -> Result<(String, String)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override '{s}' is not of the form key=value")))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

/// Load a configuration: defaults, then the optional file, then inline
/// overrides, then validation.
pub fn load_config(path: Option<&Path>, overrides: &[(String, String)]) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = path {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "{}:{}: expected 'key = value', got '{line}'",
                    path.display(),
                    lineno + 1
                ))
            })?;
            cfg.apply(key.trim(), value.trim())?;
        }
    }
    for (key, value) in overrides {
        cfg.apply(key, value)?;
    }
    cfg.validate()?;
    Ok(cfg)
}
