//! Dynamical radiation-pressure back-action of the recycled cavity on the
//! membrane: sideband transfer matrices, optical spring and damping,
//! stability, effective quality factor and noise spectra.

use crate::cavity::{
    effective_srm_reflectivity, linewidths, DarkFringeBranch, OperatingPoint,
};
use crate::mat2::ComplexMat2;
use crate::params::{MechanicalParams, MembranePosition, OpticalParams};
use crate::{Error, Result, BOLTZMANN, HBAR, SPEED_OF_LIGHT};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Transfer matrices onto the membrane surfaces at one sideband frequency.
#[derive(Clone, Copy, Debug)]
pub struct FieldMatrices {
    /// Input fields to fields incident on the membrane.
    pub incident: ComplexMat2,
    /// Input fields to fields leaving the membrane.
    pub reflected: ComplexMat2,
    /// Displacement-sourced round-trip matrix (zero without recycling).
    pub displacement: ComplexMat2,
}

/// Closed-form field matrices at sideband frequency `omega`.
pub fn membrane_field_matrices(op: &OperatingPoint, omega: f64) -> FieldMatrices {
    let p = &op.optics;
    let ph = op.phases(omega);
    let d = op.denominator(omega);
    let r_sr = effective_srm_reflectivity(p);
    let (rm, tm) = (p.membrane_refl, p.membrane_trans);
    let (rbs, tbs) = (p.bs_refl, p.bs_trans);
    let tsr = p.srm_trans;
    let i = Complex64::new(0.0, 1.0);
    let one = Complex64::new(1.0, 0.0);

    // Path phasors composed from the shared segment phasors: e1m/e1p are
    // exp(ik(L -+ dl/2)) for the full cavity, pl1/pl2 are
    // exp(ik(L + l -+ dl/2)), q is exp(ik dl), e2 is exp(2ikL).
    let seg = ph.segments;
    let pl1 = seg.arm * seg.diag_short;
    let pl2 = seg.arm * seg.diag_long;
    let e1m = pl1 * ph.srm;
    let e1p = pl2 * ph.srm;
    let e2m = e1m * e1m;
    let e2p = e1p * e1p;
    let e2 = e1m * e1p;
    let q = seg.difference();

    let incident = ComplexMat2::new(
        (tbs * (one - rm * r_sr * e2p) + i * rbs * tm * r_sr * e2) * pl1 / d,
        -tsr * rbs * e1m / d,
        (rbs * (one - rm * r_sr * e2m) + i * tbs * tm * r_sr * e2) * pl2 / d,
        tsr * tbs * e1p / d,
    );
    let reflected = ComplexMat2::new(
        (tbs * (rm * one - r_sr * e2p) + i * tm * rbs * q) * pl1 / d,
        tsr * (-rbs * rm * one + i * tm * tbs * q) * e1m / d,
        (rbs * (rm * one - r_sr * e2m) + i * tm * tbs * q.conj()) * pl2 / d,
        tsr * (tbs * rm * one - i * tm * rbs * q.conj()) * e1p / d,
    );
    let off = -rm * rbs * tbs * r_sr * e2 / d;
    let displacement = ComplexMat2::new(
        rm * rbs * rbs * r_sr * e2m / d,
        off,
        off,
        rm * tbs * tbs * r_sr * e2p / d,
    );
    FieldMatrices {
        incident,
        reflected,
        displacement,
    }
}

/// The same matrices from their defining matrix products; consistency
/// oracle for the closed forms.
pub fn membrane_field_matrices_product(op: &OperatingPoint, omega: f64) -> FieldMatrices {
    let p = &op.optics;
    let ph = op.phases(omega);
    let elem = crate::optics::elementary_from_phases(p, &ph.segments);
    let one = Complex64::new(1.0, 0.0);
    let z = Complex64::new(0.0, 0.0);
    let pr = ComplexMat2::diag(one, ph.srm);
    let tr = ComplexMat2::diag(one, Complex64::new(p.srm_trans, 0.0));
    let rr = ComplexMat2::diag(z, Complex64::new(effective_srm_reflectivity(p), 0.0));
    let k = op.recycling_matrix(omega);
    let outward = elem.diag_propagation * elem.arm_propagation * elem.beamsplitter;
    let incident = outward * k * pr * tr;
    let reflected = elem.membrane * incident;
    let inward = elem.beamsplitter.transpose() * elem.arm_propagation * elem.diag_propagation;
    let displacement =
        (outward * k * pr * rr * pr * inward).scale(Complex64::new(p.membrane_refl, 0.0));
    FieldMatrices {
        incident,
        reflected,
        displacement,
    }
}

fn kernel_11(op: &OperatingPoint, omega: f64) -> Complex64 {
    let minc0 = membrane_field_matrices(op, 0.0).incident;
    let mx = membrane_field_matrices(op, omega).displacement;
    let p = &op.optics;
    let membrane = ComplexMat2::new(
        Complex64::new(p.membrane_refl, 0.0),
        Complex64::new(0.0, p.membrane_trans),
        Complex64::new(0.0, p.membrane_trans),
        Complex64::new(p.membrane_refl, 0.0),
    );
    let s3 = ComplexMat2::sigma3();
    let inner = ComplexMat2::identity() + mx + mx;
    (minc0.adjoint() * s3 * membrane * inner * s3 * minc0).a11
}

/// Dynamical back-action coefficient K(Omega): the ponderomotive force is
/// F_x = -K(Omega) x(Omega). Complex; units N/m.
pub fn backaction_coefficient(op: &OperatingPoint, omega: f64) -> Complex64 {
    let p = &op.optics;
    let prefactor = Complex64::new(0.0, -2.0 * p.wave_number() / SPEED_OF_LIGHT)
        * p.membrane_refl
        * op.input_power;
    prefactor * (kernel_11(op, omega) - kernel_11(op, -omega).conj())
}

/// Optical spring constant K (N/m) and damping coefficient Gamma (kg/s)
/// at sideband frequency `omega` > 0.
pub fn optical_spring_and_damping(op: &OperatingPoint, omega: f64) -> (f64, f64) {
    let coeff = backaction_coefficient(op, omega);
    (coeff.re, -coeff.im / (2.0 * omega))
}

/// Effective mechanical quality factor, or the instability marker when
/// optical anti-damping overwhelms the intrinsic damping.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum QualityFactor {
    Stable(f64),
    Unstable,
}

impl QualityFactor {
    pub fn is_stable(&self) -> bool {
        matches!(self, QualityFactor::Stable(_))
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            QualityFactor::Stable(q) => Some(*q),
            QualityFactor::Unstable => None,
        }
    }
}

/// Back-action summary at the mechanical resonance frequency.
#[derive(Clone, Copy, Debug)]
pub struct BackactionResult {
    /// K(omega_m), complex, N/m.
    pub coefficient: Complex64,
    /// Optical spring constant, N/m.
    pub spring: f64,
    /// Optical damping coefficient, kg/s.
    pub damping: f64,
    pub q_eff: QualityFactor,
    pub stable: bool,
}

pub fn backaction(op: &OperatingPoint, mech: &MechanicalParams) -> BackactionResult {
    let coefficient = backaction_coefficient(op, mech.frequency);
    let spring = coefficient.re;
    let damping = -coefficient.im / (2.0 * mech.frequency);
    let margin = mech.damping_rate() + damping / mech.mass;
    let q_eff = if margin > 0.0 {
        QualityFactor::Stable(mech.frequency / (2.0 * margin))
    } else {
        QualityFactor::Unstable
    };
    BackactionResult {
        coefficient,
        spring,
        damping,
        stable: q_eff.is_stable(),
        q_eff,
    }
}

pub fn effective_quality_factor(op: &OperatingPoint, mech: &MechanicalParams) -> QualityFactor {
    backaction(op, mech).q_eff
}

/// Mode temperature under cold damping, T_bath scaled by Q_eff / Q_m.
pub fn effective_temperature(q_eff: f64, mech: &MechanicalParams) -> f64 {
    mech.bath_temperature * q_eff / mech.quality
}

/// Spectral density of the radiation-pressure force noise at sideband
/// frequency `omega` (double-sided, N^2 s). Sums the two vacuum input
/// channels; asymmetric in omega when dissipative coupling is active
/// (Fano signature).
pub fn force_noise_spectrum(op: &OperatingPoint, omega: f64) -> f64 {
    let minc0 = membrane_field_matrices(op, 0.0).incident;
    let mref = membrane_field_matrices(op, omega).reflected;
    let row = minc0.adjoint() * ComplexMat2::sigma3() * mref;
    let scale = 2.0 * HBAR * op.optics.wave_number() * op.optics.membrane_refl
        * op.input_amplitude();
    scale * scale * (row.a11.norm_sqr() + row.a12.norm_sqr())
}

/// Frequency-symmetrized back-action force density (double-sided, N^2 s).
pub fn symmetrized_force_spectrum(op: &OperatingPoint, omega: f64) -> f64 {
    0.5 * (force_noise_spectrum(op, omega) + force_noise_spectrum(op, -omega))
}

/// Double-sided thermal force density 4 k_B T m gamma_m for viscous
/// damping 2 gamma_m x'.
pub fn thermal_force_density(mech: &MechanicalParams) -> f64 {
    4.0 * BOLTZMANN * mech.bath_temperature * mech.mass * mech.damping_rate()
}

/// Effective mechanical susceptibility including optical spring and
/// damping at sideband `omega`.
pub fn effective_susceptibility(
    op: &OperatingPoint,
    mech: &MechanicalParams,
    omega: f64,
) -> Complex64 {
    let (spring, damping) = optical_spring_and_damping(op, omega);
    let gamma_eff = mech.damping_rate() + damping / mech.mass;
    let omega_sq = mech.frequency * mech.frequency + spring / mech.mass;
    let inv = Complex64::new(
        mech.mass * (omega_sq - omega * omega),
        -2.0 * mech.mass * gamma_eff * omega,
    );
    1.0 / inv
}

/// Single-sided displacement spectral density (m^2/Hz) on a grid of
/// positive sideband frequencies in rad/s; integrate over f = omega / 2 pi
/// to recover the displacement variance.
pub fn displacement_spectrum(
    op: &OperatingPoint,
    mech: &MechanicalParams,
    omegas: &[f64],
) -> Vec<f64> {
    omegas
        .iter()
        .map(|&omega| displacement_density(op, mech, omega))
        .collect()
}

pub fn displacement_density(op: &OperatingPoint, mech: &MechanicalParams, omega: f64) -> f64 {
    let force = thermal_force_density(mech) + symmetrized_force_spectrum(op, omega);
    let chi = effective_susceptibility(op, mech, omega);
    2.0 * force * chi.norm_sqr()
}

/// Detuning intervals inside [delta_lo, delta_hi] (rad/s) where the net
/// damping is negative. Sign changes are scanned on an `n_scan`-point grid
/// and bisected to 1e-6 of the cavity half-linewidth.
#[allow(clippy::too_many_arguments)]
pub fn unstable_intervals(
    p: &OpticalParams,
    mech: &MechanicalParams,
    x: MembranePosition,
    input_power: f64,
    branch: DarkFringeBranch,
    delta_lo: f64,
    delta_hi: f64,
    n_scan: usize,
) -> Result<Vec<(f64, f64)>> {
    if delta_hi <= delta_lo || n_scan < 2 {
        return Err(Error::InvalidParams(
            "instability scan needs delta_hi > delta_lo and at least 2 points".into(),
        ));
    }
    let margin = |delta: f64| -> Result<f64> {
        let op = OperatingPoint::with_total_detuning(p, x, delta, input_power, branch)?;
        let (_, damping) = optical_spring_and_damping(&op, mech.frequency);
        Ok(mech.damping_rate() + damping / mech.mass)
    };
    let tol = 1e-6 * linewidths(p, x).total;
    let step = (delta_hi - delta_lo) / (n_scan - 1) as f64;
    let mut crossings = Vec::new();
    let mut prev = margin(delta_lo)?;
    let mut prev_delta = delta_lo;
    let mut boundary_open = prev < 0.0;
    if boundary_open {
        crossings.push(delta_lo);
    }
    for j in 1..n_scan {
        let delta = delta_lo + step * j as f64;
        let cur = margin(delta)?;
        if (cur < 0.0) != (prev < 0.0) {
            let (mut lo, mut hi) = (prev_delta, delta);
            let mut lo_val = prev;
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                let mid_val = margin(mid)?;
                if (mid_val < 0.0) == (lo_val < 0.0) {
                    lo = mid;
                    lo_val = mid_val;
                } else {
                    hi = mid;
                }
            }
            crossings.push(0.5 * (lo + hi));
            boundary_open = cur < 0.0;
        }
        prev = cur;
        prev_delta = delta;
    }
    if boundary_open {
        crossings.push(delta_hi);
    }
    Ok(crossings.chunks_exact(2).map(|c| (c[0], c[1])).collect())
}
