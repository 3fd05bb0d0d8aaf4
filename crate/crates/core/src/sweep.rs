//! Sweep orchestration: resolves the operating point, evaluates grids in
//! parallel, and assembles tables with full configuration echo.

use crate::backaction::{
    self, backaction, displacement_density, unstable_intervals, QualityFactor,
};
use crate::cavity::{
    exact_detuning, linewidths, position_for_tau, DarkFringeBranch, OperatingPoint,
};
use crate::config::{DriveSpec, GridScale, PositionSpec, RunConfig, SweepKind};
use crate::couplings;
use crate::params::{MembranePosition, OpticalParams};
use crate::table::SweepTable;
use crate::{Error, Result};
use std::f64::consts::PI;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map a closure over a grid; parallel when the `parallel` feature is
/// enabled. Output order always follows grid order.
pub fn map_grid<T, F>(grid: &[f64], f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(f64) -> Result<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        grid.par_iter().map(|&g| f(g)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        grid.iter().map(|&g| f(g)).collect()
    }
}

/// Sequential reference path, kept unconditionally for benchmarks and
/// determinism checks against the parallel map.
pub fn map_grid_sequential<T, F>(grid: &[f64], f: F) -> Result<Vec<T>>
where
    F: Fn(f64) -> Result<T>,
{
    grid.iter().map(|&g| f(g)).collect()
}

/// Evenly spaced grid, linear or logarithmic.
pub fn grid_points(start: f64, stop: f64, count: usize, scale: GridScale) -> Vec<f64> {
    let n = count.max(2);
    (0..n)
        .map(|i| {
            let t = i as f64 / (n - 1) as f64;
            match scale {
                GridScale::Linear => start + (stop - start) * t,
                GridScale::Log => (start.ln() + (stop.ln() - start.ln()) * t).exp(),
            }
        })
        .collect()
}

fn resolve_grid(
    cfg: &RunConfig,
    default_start: f64,
    default_stop: f64,
    default_count: usize,
    default_scale: GridScale,
) -> Vec<f64> {
    grid_points(
        cfg.sweep.start.unwrap_or(default_start),
        cfg.sweep.stop.unwrap_or(default_stop),
        cfg.sweep.count.unwrap_or(default_count),
        cfg.sweep.scale.unwrap_or(default_scale),
    )
}

/// A located point on the transmission flank walked from the dark port.
#[derive(Clone, Copy, Debug)]
pub struct PeakFractionPoint {
    pub fraction: f64,
    /// Raw (non-canonicalized) membrane position, m.
    pub position: MembranePosition,
    /// Recycling mirror displacement the locator assumed, m.
    pub srm_displacement: f64,
    /// Normalized transmitted power at the point.
    pub transmitted: f64,
}

/// Recycling mirror displacement that puts the cavity on resonance at the
/// impedance-matched membrane position (gamma_MSI = gamma_SR on the
/// tau < 0 flank); the configuration behind the membrane-scan defaults.
pub fn matched_srm_displacement(p: &OpticalParams, branch: DarkFringeBranch) -> Result<f64> {
    let x = matched_position_raw(p, branch)?;
    let msi = exact_detuning(p, x, 0.0, branch)?.msi;
    Ok(msi * p.total_length() / p.carrier_frequency())
}

/// Impedance-matched position as the raw coordinate nearest the branch
/// dark port on the tau < 0 side.
fn matched_position_raw(p: &OpticalParams, branch: DarkFringeBranch) -> Result<MembranePosition> {
    let t_eff = (p.srm_trans * p.srm_trans + p.srm_loss_sq).sqrt();
    let matched = position_for_tau(p, -t_eff, branch)?;
    let dark = branch.dark_port(p)?;
    Ok(nearest_image(matched, dark, p.wavelength))
}

fn nearest_image(x: MembranePosition, anchor: MembranePosition, wavelength: f64) -> MembranePosition {
    let period = wavelength / 2.0;
    let shift = ((x.meters() - anchor.meters()) / period).round();
    MembranePosition(x.meters() - shift * period)
}

/// Walk the transmission flank between the dark port and the resonance
/// peak; returns one point per requested peak-height fraction (1.0 is the
/// peak itself). Fractions are located on the dark-port side of the peak,
/// matching the numbered operating points of the membrane scan.
pub fn locate_peak_fractions(
    p: &OpticalParams,
    branch: DarkFringeBranch,
    power: f64,
    fractions: &[f64],
) -> Result<Vec<PeakFractionPoint>> {
    let dl = matched_srm_displacement(p, branch)?;
    let x_matched = matched_position_raw(p, branch)?.meters();
    let x_dark = nearest_image(branch.dark_port(p)?, MembranePosition(x_matched), p.wavelength)
        .meters();
    let power = if power > 0.0 { power } else { 0.02 };
    let transmitted = |x: f64| -> Result<f64> {
        let op =
            OperatingPoint::with_srm_displacement(p, MembranePosition(x), dl, power, branch)?;
        Ok(op.transmitted_power_normalized())
    };
    // Ternary search for the true peak around the matched position.
    let span = (x_dark - x_matched).abs().max(1e-12);
    let (mut lo, mut hi) = if x_dark > x_matched {
        (x_matched - 0.5 * span, x_matched + 0.5 * span)
    } else {
        (x_matched - 0.5 * span, x_dark)
    };
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if transmitted(m1)? < transmitted(m2)? {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let x_peak = 0.5 * (lo + hi);
    let p_peak = transmitted(x_peak)?;
    let mut out = Vec::with_capacity(fractions.len());
    for &fraction in fractions {
        if !(0.0 < fraction && fraction <= 1.0) {
            return Err(Error::Config(format!(
                "peak fraction {fraction} must lie in (0, 1]"
            )));
        }
        let x = if fraction >= 1.0 {
            x_peak
        } else {
            // Bisect on the monotone flank between peak and dark port.
            let target = fraction * p_peak;
            let (mut a, mut b) = (x_peak, x_dark);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if transmitted(mid)? > target {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            0.5 * (a + b)
        };
        out.push(PeakFractionPoint {
            fraction,
            position: MembranePosition(x),
            srm_displacement: dl,
            transmitted: transmitted(x)?,
        });
    }
    Ok(out)
}

/// Operating membrane position resolved from the configuration.
pub fn resolve_position(cfg: &RunConfig) -> Result<MembranePosition> {
    match cfg.operating.position {
        PositionSpec::DarkPort => cfg.operating.branch.dark_port(&cfg.optics),
        PositionSpec::Absolute(x) => Ok(MembranePosition(x)),
        PositionSpec::PeakFraction(fraction) => {
            let points = locate_peak_fractions(
                &cfg.optics,
                cfg.operating.branch,
                cfg.operating.power,
                &[fraction],
            )?;
            Ok(points[0].position)
        }
    }
}

fn fixed_detuning(cfg: &RunConfig, x: MembranePosition) -> Result<f64> {
    match cfg.operating.drive {
        Some(DriveSpec::TotalDetuning(d)) => Ok(d),
        Some(DriveSpec::SrmDisplacement(dl)) => {
            Ok(exact_detuning(&cfg.optics, x, dl, cfg.operating.branch)?.total)
        }
        // Peak-fraction positions implicitly sit in the matched-mirror
        // configuration; everything else defaults to resonance.
        None => match cfg.operating.position {
            PositionSpec::PeakFraction(_) => {
                let dl = matched_srm_displacement(&cfg.optics, cfg.operating.branch)?;
                Ok(exact_detuning(&cfg.optics, x, dl, cfg.operating.branch)?.total)
            }
            _ => Ok(0.0),
        },
    }
}

/// Dispatch on the configured sweep kind.
pub fn run(cfg: &RunConfig) -> Result<SweepTable> {
    match cfg.sweep.kind {
        Some(SweepKind::Detuning) => sweep_detuning(cfg),
        Some(SweepKind::Power) => sweep_power(cfg),
        Some(SweepKind::Membrane) => sweep_membrane(cfg),
        Some(SweepKind::Srm) => sweep_srm(cfg),
        Some(SweepKind::Couplings) => sweep_couplings(cfg),
        Some(SweepKind::Spectrum) => sweep_spectrum(cfg),
        None => Err(Error::Config("no sweep kind configured".into())),
    }
}

fn base_table(cfg: &RunConfig, independent: &str, grid: Vec<f64>) -> SweepTable {
    let mut table = SweepTable::new(independent, grid);
    table.push_metadata(
        "artifact",
        format!("msi-optomech {}", env!("CARGO_PKG_VERSION")),
    );
    for (k, v) in cfg.resolved_entries() {
        table.push_metadata(k, v);
    }
    table
}

struct DampingRow {
    q_eff: f64,
    stable: f64,
    damping_rate: f64,
    spring_shift: f64,
}

fn damping_row(cfg: &RunConfig, op: &OperatingPoint) -> DampingRow {
    let result = backaction(op, &cfg.mech);
    DampingRow {
        q_eff: match result.q_eff {
            QualityFactor::Stable(q) => q,
            QualityFactor::Unstable => f64::NAN,
        },
        stable: if result.stable { 1.0 } else { 0.0 },
        damping_rate: result.damping / cfg.mech.mass,
        spring_shift: result.spring / cfg.mech.mass,
    }
}

fn push_damping_columns(table: &mut SweepTable, rows: Vec<DampingRow>) {
    table.push_column("q_eff", rows.iter().map(|r| r.q_eff).collect());
    table.push_column("stable", rows.iter().map(|r| r.stable).collect());
    table.push_column("damping_rate", rows.iter().map(|r| r.damping_rate).collect());
    table.push_column("spring_shift", rows.iter().map(|r| r.spring_shift).collect());
}

/// Effective quality factor over a detuning grid in units of the cavity
/// half-linewidth at the operating position.
pub fn sweep_detuning(cfg: &RunConfig) -> Result<SweepTable> {
    let x = resolve_position(cfg)?;
    let gamma = linewidths(&cfg.optics, x).total;
    let grid = resolve_grid(cfg, -1.0, 1.0, 201, GridScale::Linear);
    let rows = map_grid(&grid, |dg| {
        let op = OperatingPoint::with_total_detuning(
            &cfg.optics,
            x,
            dg * gamma,
            cfg.operating.power,
            cfg.operating.branch,
        )?;
        Ok(damping_row(cfg, &op))
    })?;
    let mut table = base_table(cfg, "delta_over_gamma", grid.clone());
    table.push_metadata("resolved.position_m", format!("{:?}", x.meters()));
    table.push_metadata("resolved.gamma_rad_s", format!("{gamma:?}"));
    let lo = grid.first().copied().unwrap() * gamma;
    let hi = grid.last().copied().unwrap() * gamma;
    let intervals = unstable_intervals(
        &cfg.optics,
        &cfg.mech,
        x,
        cfg.operating.power,
        cfg.operating.branch,
        lo.min(hi),
        lo.max(hi),
        grid.len().max(201),
    )?;
    let rendered: Vec<String> = intervals
        .iter()
        .map(|(a, b)| format!("{a:?}..{b:?}"))
        .collect();
    table.push_metadata("resolved.unstable_intervals_rad_s", rendered.join(";"));
    table.push_column("delta_rad_s", grid.iter().map(|d| d * gamma).collect());
    push_damping_columns(&mut table, rows);
    Ok(table)
}

/// Cooling versus input power at fixed detuning.
pub fn sweep_power(cfg: &RunConfig) -> Result<SweepTable> {
    let x = resolve_position(cfg)?;
    let delta = fixed_detuning(cfg, x)?;
    let grid = resolve_grid(cfg, 0.3e-3, 0.2, 41, GridScale::Log);
    let rows = map_grid(&grid, |power| {
        let op = OperatingPoint::with_total_detuning(
            &cfg.optics,
            x,
            delta,
            power,
            cfg.operating.branch,
        )?;
        Ok(damping_row(cfg, &op))
    })?;
    let mut table = base_table(cfg, "power_w", grid);
    table.push_metadata("resolved.position_m", format!("{:?}", x.meters()));
    table.push_metadata("resolved.delta_rad_s", format!("{delta:?}"));
    push_damping_columns(&mut table, rows);
    Ok(table)
}

/// Transmission, linewidth and detuning versus membrane position at a
/// fixed recycling mirror.
pub fn sweep_membrane(cfg: &RunConfig) -> Result<SweepTable> {
    let p = &cfg.optics;
    let dl = match cfg.operating.drive {
        Some(DriveSpec::SrmDisplacement(d)) => d,
        Some(DriveSpec::TotalDetuning(_)) => {
            return Err(Error::Config(
                "membrane sweeps fix the mirror, not the detuning; set op.srm_displacement instead of op.detuning".into(),
            ))
        }
        None => matched_srm_displacement(p, cfg.operating.branch)?,
    };
    let grid = resolve_grid(cfg, 0.0, p.wavelength / 2.0, 1001, GridScale::Linear);
    struct Row {
        transmitted: f64,
        delta: f64,
        gamma_over_2pi: f64,
        tau: f64,
    }
    let rows = map_grid(&grid, |x| {
        let x = MembranePosition(x);
        let op = OperatingPoint::with_srm_displacement(
            p,
            x,
            dl,
            cfg.operating.power,
            cfg.operating.branch,
        )?;
        Ok(Row {
            transmitted: op.transmitted_power_normalized(),
            delta: op.detuning.total,
            gamma_over_2pi: linewidths(p, x).total / (2.0 * PI),
            tau: crate::optics::msi_coefficients(p, p.wave_number(), x).tau,
        })
    })?;
    let peak = rows
        .iter()
        .map(|r| r.transmitted)
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut table = base_table(cfg, "position_m", grid);
    table.push_metadata("resolved.srm_displacement_m", format!("{dl:?}"));
    let marks = locate_peak_fractions(
        p,
        cfg.operating.branch,
        cfg.operating.power,
        &[0.07, 0.60, 0.90, 0.95, 1.00],
    )?;
    for (i, mark) in marks.iter().enumerate() {
        table.push_metadata(
            format!("resolved.position_{}_m", i + 1),
            format!(
                "{:?}",
                mark.position.canonical(p.wavelength).meters()
            ),
        );
    }
    table.push_column("p_trans_norm", rows.iter().map(|r| r.transmitted).collect());
    table.push_column(
        "p_trans_peak_norm",
        rows.iter().map(|r| r.transmitted / peak).collect(),
    );
    table.push_column("delta_rad_s", rows.iter().map(|r| r.delta).collect());
    table.push_column("gamma_over_2pi", rows.iter().map(|r| r.gamma_over_2pi).collect());
    table.push_column("tau", rows.iter().map(|r| r.tau).collect());
    Ok(table)
}

/// Transmission resonance versus recycling mirror displacement at fixed
/// membrane position.
pub fn sweep_srm(cfg: &RunConfig) -> Result<SweepTable> {
    let x = resolve_position(cfg)?;
    let grid = resolve_grid(cfg, -1.5e-9, 1.5e-9, 601, GridScale::Linear);
    struct Row {
        transmitted: f64,
        delta: f64,
    }
    let rows = map_grid(&grid, |dl| {
        let op = OperatingPoint::with_srm_displacement(
            &cfg.optics,
            x,
            dl,
            cfg.operating.power,
            cfg.operating.branch,
        )?;
        Ok(Row {
            transmitted: op.transmitted_power_normalized(),
            delta: op.detuning.total,
        })
    })?;
    let mut table = base_table(cfg, "srm_displacement_m", grid);
    table.push_metadata("resolved.position_m", format!("{:?}", x.meters()));
    table.push_metadata(
        "resolved.gamma_rad_s",
        format!("{:?}", linewidths(&cfg.optics, x).total),
    );
    table.push_column("p_trans_norm", rows.iter().map(|r| r.transmitted).collect());
    table.push_column("delta_rad_s", rows.iter().map(|r| r.delta).collect());
    Ok(table)
}

/// Coupling rates over one position period.
pub fn sweep_couplings(cfg: &RunConfig) -> Result<SweepTable> {
    let p = &cfg.optics;
    let grid = resolve_grid(cfg, 0.0, p.wavelength / 2.0, 1001, GridScale::Linear);
    let rows = map_grid(&grid, |x| {
        Ok(couplings::coupling_rates(p, &cfg.mech, MembranePosition(x)))
    })?;
    let mut table = base_table(cfg, "position_m", grid);
    table.push_column(
        "g_omega_over_2pi",
        rows.iter().map(|r| r.dispersive / (2.0 * PI)).collect(),
    );
    table.push_column(
        "g_gamma_over_2pi",
        rows.iter().map(|r| r.dissipative / (2.0 * PI)).collect(),
    );
    table.push_column(
        "g_norm",
        rows.iter().map(|r| r.normalized_dissipative).collect(),
    );
    Ok(table)
}

/// Displacement noise spectrum around the mechanical resonance.
pub fn sweep_spectrum(cfg: &RunConfig) -> Result<SweepTable> {
    let x = resolve_position(cfg)?;
    let delta = fixed_detuning(cfg, x)?;
    let f_m = cfg.mech.frequency / (2.0 * PI);
    let grid = resolve_grid(cfg, f_m - 2e3, f_m + 2e3, 2001, GridScale::Linear);
    let op = OperatingPoint::with_total_detuning(
        &cfg.optics,
        x,
        delta,
        cfg.operating.power,
        cfg.operating.branch,
    )?;
    let quiet = OperatingPoint::with_total_detuning(
        &cfg.optics,
        x,
        delta,
        0.0,
        cfg.operating.branch,
    )?;
    struct Row {
        driven: f64,
        thermal: f64,
    }
    let rows = map_grid(&grid, |f| {
        let omega = 2.0 * PI * f;
        Ok(Row {
            driven: displacement_density(&op, &cfg.mech, omega),
            thermal: displacement_density(&quiet, &cfg.mech, omega),
        })
    })?;
    let mut table = base_table(cfg, "frequency_hz", grid);
    table.push_metadata("resolved.position_m", format!("{:?}", x.meters()));
    table.push_metadata("resolved.delta_rad_s", format!("{delta:?}"));
    match backaction::effective_quality_factor(&op, &cfg.mech) {
        QualityFactor::Stable(q) => {
            table.push_metadata("resolved.q_eff", format!("{q:?}"));
        }
        QualityFactor::Unstable => {
            table.push_metadata("resolved.q_eff", "unstable".to_string());
        }
    }
    table.push_column("s_x_m2_per_hz", rows.iter().map(|r| r.driven).collect());
    table.push_column(
        "s_x_thermal_m2_per_hz",
        rows.iter().map(|r| r.thermal).collect(),
    );
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::load_config;

    fn cfg_with(kind: &str, extra: &[(&str, &str)]) -> RunConfig {
        let mut overrides = vec![("sweep.kind".to_string(), kind.to_string())];
        for (k, v) in extra {
            overrides.push((k.to_string(), v.to_string()));
        }
        load_config(None, &overrides).unwrap()
    }

    #[test]
    fn grids_are_inclusive_and_scaled() {
        let lin = grid_points(-1.0, 1.0, 5, GridScale::Linear);
        assert_eq!(lin, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        let log = grid_points(1e-3, 1e1, 5, GridScale::Log);
        assert!((log[0] - 1e-3).abs() < 1e-18);
        assert!((log[4] - 1e1).abs() < 1e-12);
        assert!((log[2] - 1e-1).abs() < 1e-13);
    }

    #[test]
    fn parallel_and_sequential_maps_agree_bitwise() {
        let cfg = cfg_with("detuning", &[("sweep.count", "25")]);
        let x = resolve_position(&cfg).unwrap();
        let gamma = linewidths(&cfg.optics, x).total;
        let grid = grid_points(-1.0, 1.0, 25, GridScale::Linear);
        let eval = |dg: f64| -> Result<f64> {
            let op = OperatingPoint::with_total_detuning(
                &cfg.optics,
                x,
                dg * gamma,
                cfg.operating.power,
                cfg.operating.branch,
            )?;
            Ok(backaction(&op, &cfg.mech).damping)
        };
        let par = map_grid(&grid, eval).unwrap();
        let seq = map_grid_sequential(&grid, eval).unwrap();
        assert_eq!(par.len(), seq.len());
        for (a, b) in par.iter().zip(&seq) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn peak_fraction_points_are_ordered_along_the_flank() {
        let p = OpticalParams::reference();
        let marks = locate_peak_fractions(
            &p,
            DarkFringeBranch::Lower,
            0.02,
            &[0.07, 0.60, 0.90, 0.95, 1.00],
        )
        .unwrap();
        // Walking from the dark port towards the peak the fraction grows
        // and the raw position falls.
        for w in marks.windows(2) {
            assert!(w[1].position.meters() < w[0].position.meters());
        }
        let peak = marks.last().unwrap();
        assert!((peak.transmitted / marks[0].transmitted) > 10.0);
        for mark in &marks {
            assert!(
                (mark.transmitted / peak.transmitted - mark.fraction).abs() < 1e-6,
                "fraction {} found at height {}",
                mark.fraction,
                mark.transmitted / peak.transmitted
            );
        }
    }

    #[test]
    fn detuning_sweep_reports_unstable_intervals() {
        let cfg = cfg_with(
            "detuning",
            &[("op.peak_fraction", "1.0"), ("sweep.count", "41")],
        );
        let table = sweep_detuning(&cfg).unwrap();
        assert_eq!(table.independent, "delta_over_gamma");
        let (_, stable) = table
            .columns
            .iter()
            .find(|(n, _)| n == "stable")
            .unwrap();
        assert!(stable.contains(&0.0), "expected unstable points");
        let meta: std::collections::HashMap<_, _> =
            table.metadata.iter().cloned().collect();
        assert!(!meta["resolved.unstable_intervals_rad_s"].is_empty());
        // Unstable rows carry NaN q_eff but are present.
        let (_, q) = table.columns.iter().find(|(n, _)| n == "q_eff").unwrap();
        assert_eq!(q.len(), table.grid.len());
    }

    fn cooling_position() -> String {
        // Positive-tau flank point with gamma_MSI = gamma_SR / 2; cools at
        // zero detuning through the dissipative channel.
        let p = crate::params::OpticalParams::reference();
        let x = crate::cavity::position_for_linewidth_ratio(
            &p,
            0.5,
            false,
            DarkFringeBranch::Lower,
        )
        .unwrap();
        format!("{:?}", x.meters())
    }

    #[test]
    fn power_sweep_is_strictly_decreasing_at_cooling_point() {
        let pos = cooling_position();
        let cfg = cfg_with(
            "power",
            &[("op.position", pos.as_str()), ("sweep.count", "15")],
        );
        let table = sweep_power(&cfg).unwrap();
        let (_, q) = table.columns.iter().find(|(n, _)| n == "q_eff").unwrap();
        for w in q.windows(2) {
            assert!(w[1] < w[0], "q_eff not decreasing: {w:?}");
        }
        // Cooling from the outset, and optically dominated well before the
        // top of the power grid.
        assert!(q[0] < cfg.mech.quality);
        assert!(q.last().unwrap() < &(0.01 * q[0]));
    }

    #[test]
    fn membrane_sweep_spans_linewidth_range() {
        let cfg = cfg_with("membrane", &[("sweep.count", "701")]);
        let table = sweep_membrane(&cfg).unwrap();
        let (_, gamma) = table
            .columns
            .iter()
            .find(|(n, _)| n == "gamma_over_2pi")
            .unwrap();
        let lo = gamma.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = gamma.iter().cloned().fold(0.0f64, f64::max);
        // Narrowest at the dark fringe (mirror-dominated linewidth), orders
        // of magnitude wider at the bright fringe.
        assert!((lo / 0.727e6 - 1.0).abs() < 0.02, "min {lo}");
        assert!(hi > 1e7, "max {hi}");
        let (_, peak_norm) = table
            .columns
            .iter()
            .find(|(n, _)| n == "p_trans_peak_norm")
            .unwrap();
        assert!(peak_norm.iter().cloned().fold(0.0f64, f64::max) <= 1.0 + 1e-12);
    }

    #[test]
    fn srm_sweep_width_matches_linewidths() {
        let cfg = cfg_with(
            "srm",
            &[("op.peak_fraction", "0.95"), ("sweep.count", "4001")],
        );
        let x = resolve_position(&cfg).unwrap();
        let gamma = linewidths(&cfg.optics, x).total;
        let table = sweep_srm(&cfg).unwrap();
        let (_, trans) = table
            .columns
            .iter()
            .find(|(n, _)| n == "p_trans_norm")
            .unwrap();
        let (_, delta) = table
            .columns
            .iter()
            .find(|(n, _)| n == "delta_rad_s")
            .unwrap();
        let (imax, peak) = trans
            .iter()
            .enumerate()
            .fold((0, 0.0), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        // Half-width at half-maximum read off the detuning column.
        let mut hwhm = None;
        for i in imax..trans.len() - 1 {
            if trans[i + 1] <= peak / 2.0 {
                hwhm = Some((delta[i + 1] - delta[imax]).abs());
                break;
            }
        }
        let hwhm = hwhm.expect("resonance not resolved");
        assert!((hwhm / gamma - 1.0).abs() < 0.02, "hwhm {hwhm} vs gamma {gamma}");
    }

    #[test]
    fn couplings_sweep_matches_pointwise_rates() {
        let cfg = cfg_with("couplings", &[("sweep.count", "101")]);
        let table = sweep_couplings(&cfg).unwrap();
        let (_, g_w) = table
            .columns
            .iter()
            .find(|(n, _)| n == "g_omega_over_2pi")
            .unwrap();
        let x = MembranePosition(table.grid[37]);
        let expected =
            couplings::dispersive_coupling(&cfg.optics, &cfg.mech, x) / (2.0 * PI);
        assert_eq!(g_w[37].to_bits(), expected.to_bits());
    }

    #[test]
    fn spectrum_sweep_peaks_near_mechanical_resonance() {
        let pos = cooling_position();
        let cfg = cfg_with(
            "spectrum",
            &[("op.position", pos.as_str()), ("sweep.count", "801")],
        );
        let table = sweep_spectrum(&cfg).unwrap();
        let (_, s) = table
            .columns
            .iter()
            .find(|(n, _)| n == "s_x_m2_per_hz")
            .unwrap();
        let (imax, _) = s
            .iter()
            .enumerate()
            .fold((0, 0.0), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        let f_m = cfg.mech.frequency / (2.0 * PI);
        assert!((table.grid[imax] - f_m).abs() < 500.0);
        let (_, thermal) = table
            .columns
            .iter()
            .find(|(n, _)| n == "s_x_thermal_m2_per_hz")
            .unwrap();
        // Cooling suppresses the peak; the undamped reference beats the
        // driven curve at its own (much narrower) maximum.
        let t_max = thermal.iter().cloned().fold(0.0f64, f64::max);
        let s_max = s.iter().cloned().fold(0.0f64, f64::max);
        assert!(s_max < 0.01 * t_max, "driven {s_max} thermal {t_max}");
    }

    #[test]
    fn run_requires_a_kind() {
        let cfg = load_config(None, &[]).unwrap();
        assert!(matches!(run(&cfg), Err(Error::Config(_))));
    }
}
