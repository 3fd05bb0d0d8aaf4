//! Single-photon coupling rates of the effective-cavity description:
//! the membrane shifts the cavity eigenfrequency (dispersive coupling)
//! and the interferometer-side half-linewidth (dissipative coupling).

use crate::cavity::{dark_port_phase, DarkFringeBranch};
use crate::optics::{arg_rho_unwrapped, msi_coefficients};
use crate::params::{MechanicalParams, MembranePosition, OpticalParams};
use crate::SPEED_OF_LIGHT;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Coupling rates at one membrane position.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingRates {
    /// Dispersive rate x_ZPF d omega_c / dx, rad/s.
    pub dispersive: f64,
    /// Dissipative rate x_ZPF d gamma_MSI / dx, rad/s.
    pub dissipative: f64,
    /// g_gamma / sqrt(2 gamma_MSI), finite through the dark port.
    pub normalized_dissipative: f64,
    /// Zero-point amplitude, m.
    pub zero_point: f64,
}

/// Zero-point position fluctuation sqrt(hbar / (2 m omega_m)).
pub fn zero_point_amplitude(mech: &MechanicalParams) -> f64 {
    mech.zero_point_amplitude()
}

/// Longitudinal mode index of the effective cavity nearest to the carrier,
/// anchored at the lower-branch dark port phase (or the phase at x = 0
/// when no dark port exists).
pub fn resonance_index(p: &OpticalParams) -> i64 {
    let k0 = p.wave_number();
    let anchor = dark_port_phase(p, DarkFringeBranch::Lower)
        .unwrap_or_else(|_| msi_coefficients(p, k0, MembranePosition(0.0)).rho.arg());
    ((2.0 * k0 * p.total_length() - anchor) / (2.0 * PI)).round() as i64
}

/// Eigenfrequency of the intracavity mode,
/// omega_c(x) = pi N c / L + (c / 2L) arg rho(x), with arg rho on the
/// branch continuous in x.
pub fn cavity_eigenfrequency(p: &OpticalParams, x: MembranePosition) -> f64 {
    let n = resonance_index(p) as f64;
    let phase = arg_rho_unwrapped(p, p.wave_number(), x);
    PI * n * SPEED_OF_LIGHT / p.total_length()
        + SPEED_OF_LIGHT / (2.0 * p.total_length()) * phase
}

/// The x-dependent part of the eigenfrequency, (c / 2L) arg rho(x).
/// Finite-difference checks use this to avoid cancellation against the
/// huge constant pi N c / L term.
pub fn eigenfrequency_offset(p: &OpticalParams, x: MembranePosition) -> f64 {
    SPEED_OF_LIGHT / (2.0 * p.total_length()) * arg_rho_unwrapped(p, p.wave_number(), x)
}

/// Dispersive coupling rate
/// g_omega = omega_0 (x_ZPF / L) [r_m^2 eps + r_m t_m sqrt(1 - eps^2) sin 2k0 x] / |rho|^2.
pub fn dispersive_coupling(p: &OpticalParams, mech: &MechanicalParams, x: MembranePosition) -> f64 {
    let eps = p.bs_asymmetry();
    let theta = 2.0 * p.wave_number() * x.meters();
    let rho_sq = msi_coefficients(p, p.wave_number(), x).rho.norm_sqr();
    let bracket = p.membrane_refl * p.membrane_refl * eps
        + p.membrane_refl * p.membrane_trans * (1.0 - eps * eps).sqrt() * theta.sin();
    p.carrier_frequency() * mech.zero_point_amplitude() / p.total_length() * bracket / rho_sq
}

/// Dissipative coupling rate
/// g_gamma = omega_0 (x_ZPF / L) tau(x) r_m sqrt(1 - eps^2) cos 2k0 x.
pub fn dissipative_coupling(
    p: &OpticalParams,
    mech: &MechanicalParams,
    x: MembranePosition,
) -> f64 {
    let eps = p.bs_asymmetry();
    let theta = 2.0 * p.wave_number() * x.meters();
    let tau = msi_coefficients(p, p.wave_number(), x).tau;
    p.carrier_frequency() * mech.zero_point_amplitude() / p.total_length()
        * tau
        * p.membrane_refl
        * (1.0 - eps * eps).sqrt()
        * theta.cos()
}

/// g_gamma / sqrt(2 gamma_MSI) with the tau / |tau| cancellation done
/// algebraically, so the value is finite and continuous through tau = 0:
/// omega_0 (x_ZPF / L) r_m sqrt(1 - eps^2) cos(2k0 x) sqrt(2L / c).
pub fn normalized_dissipative_rate(
    p: &OpticalParams,
    mech: &MechanicalParams,
    x: MembranePosition,
) -> f64 {
    let eps = p.bs_asymmetry();
    let theta = 2.0 * p.wave_number() * x.meters();
    p.carrier_frequency() * mech.zero_point_amplitude() / p.total_length()
        * p.membrane_refl
        * (1.0 - eps * eps).sqrt()
        * theta.cos()
        * (2.0 * p.total_length() / SPEED_OF_LIGHT).sqrt()
}

pub fn coupling_rates(
    p: &OpticalParams,
    mech: &MechanicalParams,
    x: MembranePosition,
) -> CouplingRates {
    CouplingRates {
        dispersive: dispersive_coupling(p, mech, x),
        dissipative: dissipative_coupling(p, mech, x),
        normalized_dissipative: normalized_dissipative_rate(p, mech, x),
        zero_point: mech.zero_point_amplitude(),
    }
}
