//! Bare Michelson-Sagnac interferometer seen from the recycling port.
//!
//! The interferometer is a compound mirror: a beam splitter, two folded
//! arms of equal length, and a translucent membrane at the beam crossing,
//! displaced by x from the symmetric position. Its reflection coefficient
//! rho and transmission coefficient tau (towards the open port) depend on
//! x through the arm length difference 2x.

use crate::mat2::ComplexMat2;
use crate::params::{MembranePosition, OpticalParams};
use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Unit phasors of the three propagation segments at wave number `k`.
///
/// Both the elementary-matrix product and the closed-form transfer matrix
/// are composed from these same phasor values, so the two routes agree to
/// machine precision even though k times a segment length is of order 1e5
/// radians.
#[derive(Clone, Copy, Debug)]
pub struct SegmentPhases {
    /// exp(i k L) for one folded arm.
    pub arm: Complex64,
    /// exp(i k (l - x)), short diagonal.
    pub diag_short: Complex64,
    /// exp(i k (l + x)), long diagonal.
    pub diag_long: Complex64,
}

impl SegmentPhases {
    pub fn at_carrier(p: &OpticalParams, k: f64, x: MembranePosition) -> Self {
        let two_pi = 2.0 * PI;
        let kappa_arm = (k * p.arm_length).rem_euclid(two_pi);
        let kappa_diag = (k * p.diag_length).rem_euclid(two_pi);
        let kx = k * x.meters();
        Self {
            arm: Complex64::from_polar(1.0, kappa_arm),
            diag_short: Complex64::from_polar(1.0, kappa_diag - kx),
            diag_long: Complex64::from_polar(1.0, kappa_diag + kx),
        }
    }

    /// Common phase factor exp(2 i k (L + l)) of the compound mirror.
    pub fn prefactor(&self) -> Complex64 {
        self.arm * self.arm * self.diag_short * self.diag_long
    }

    /// exp(i k 2x), the arm difference phasor.
    pub fn difference(&self) -> Complex64 {
        self.diag_long * self.diag_short.conj()
    }
}

/// The four elementary matrices of the interferometer.
#[derive(Clone, Copy, Debug)]
pub struct ElementaryMatrices {
    /// Central beam splitter, [[t, -r], [r, t]].
    pub beamsplitter: ComplexMat2,
    /// Membrane, [[r_m, i t_m], [i t_m, r_m]].
    pub membrane: ComplexMat2,
    /// Folded arm propagation, exp(i k L) times identity.
    pub arm_propagation: ComplexMat2,
    /// Diagonal propagation, diag(exp(i k (l - x)), exp(i k (l + x))).
    pub diag_propagation: ComplexMat2,
}

pub fn elementary_matrices(p: &OpticalParams, k: f64, x: MembranePosition) -> ElementaryMatrices {
    let ph = SegmentPhases::at_carrier(p, k, x);
    elementary_from_phases(p, &ph)
}

pub fn elementary_from_phases(p: &OpticalParams, ph: &SegmentPhases) -> ElementaryMatrices {
    let z = Complex64::new(0.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    ElementaryMatrices {
        beamsplitter: ComplexMat2::new(
            Complex64::new(p.bs_trans, 0.0),
            Complex64::new(-p.bs_refl, 0.0),
            Complex64::new(p.bs_refl, 0.0),
            Complex64::new(p.bs_trans, 0.0),
        ),
        membrane: ComplexMat2::new(
            Complex64::new(p.membrane_refl, 0.0),
            i * p.membrane_trans,
            i * p.membrane_trans,
            Complex64::new(p.membrane_refl, 0.0),
        ),
        arm_propagation: ComplexMat2::new(ph.arm, z, z, ph.arm),
        diag_propagation: ComplexMat2::diag(ph.diag_short, ph.diag_long),
    }
}

/// Reflection and transmission of the compound mirror, with the common
/// propagation phase split off.
#[derive(Clone, Copy, Debug)]
pub struct MsiCoefficients {
    /// Reflection coefficient back towards the recycling port.
    pub rho: Complex64,
    /// Transmission towards the open port; real in this convention.
    pub tau: f64,
}

/// rho and tau at membrane position `x`, evaluated with the exact arm
/// difference phase 2 k x (most accurate form, used for dark port searches
/// and coupling rates).
pub fn msi_coefficients(p: &OpticalParams, k: f64, x: MembranePosition) -> MsiCoefficients {
    let theta = 2.0 * k * x.meters();
    let q = Complex64::from_polar(1.0, theta);
    coefficients_from_difference(p, q)
}

/// rho and tau from an externally supplied unit arm-difference phasor
/// q = exp(i k 2x); lets callers with their own phase bookkeeping stay
/// bit-consistent with the transfer matrices.
pub fn coefficients_from_difference(p: &OpticalParams, q: Complex64) -> MsiCoefficients {
    let r2 = p.bs_refl * p.bs_refl;
    let t2 = p.bs_trans * p.bs_trans;
    let rho = p.membrane_refl * (r2 * q + t2 * q.conj())
        + Complex64::new(0.0, 2.0 * p.membrane_trans * p.bs_refl * p.bs_trans);
    let tau = 2.0 * p.membrane_refl * p.bs_refl * p.bs_trans * q.im
        - p.membrane_trans * p.bs_asymmetry();
    MsiCoefficients { rho, tau }
}

/// Closed-form transfer matrix of the compound mirror,
/// exp(2ik(L+l)) [[rho, i tau], [i tau, rho*]], composed from the same
/// segment phasors as the elementary-matrix product.
pub fn msi_transfer_matrix(p: &OpticalParams, k: f64, x: MembranePosition) -> ComplexMat2 {
    let ph = SegmentPhases::at_carrier(p, k, x);
    msi_transfer_from_phases(p, &ph)
}

pub fn msi_transfer_from_phases(p: &OpticalParams, ph: &SegmentPhases) -> ComplexMat2 {
    let c = coefficients_from_difference(p, ph.difference());
    let itau = Complex64::new(0.0, c.tau);
    ComplexMat2::new(c.rho, itau, itau, c.rho.conj()).scale(ph.prefactor())
}

/// Transfer matrix as the literal product of elementary matrices.
pub fn msi_transfer_product(p: &OpticalParams, k: f64, x: MembranePosition) -> ComplexMat2 {
    let ph = SegmentPhases::at_carrier(p, k, x);
    msi_product_from_phases(p, &ph)
}

pub fn msi_product_from_phases(p: &OpticalParams, ph: &SegmentPhases) -> ComplexMat2 {
    let e = elementary_from_phases(p, ph);
    let inward = e.diag_propagation * e.arm_propagation * e.beamsplitter;
    e.beamsplitter.transpose() * e.arm_propagation * e.diag_propagation * e.membrane * inward
}

/// The two membrane positions in [0, lambda/2) that extinguish the open
/// port (tau = 0). The first element is the branch where tau grows with x
/// (membrane near a node), the second where it falls. Fails with
/// [`Error::NoDarkPort`] when the beam splitter asymmetry is too large
/// for the membrane to compensate.
pub fn dark_port_offsets(p: &OpticalParams) -> Result<[MembranePosition; 2]> {
    let denom = 2.0 * p.membrane_refl * p.bs_refl * p.bs_trans;
    if denom == 0.0 {
        return Err(Error::NoDarkPort);
    }
    let s = p.membrane_trans * p.bs_asymmetry() / denom;
    if s.abs() > 1.0 {
        return Err(Error::NoDarkPort);
    }
    let k = p.wave_number();
    let theta1 = s.asin();
    let theta2 = PI - theta1;
    let out = [theta1, theta2].map(|theta| {
        let mut x = theta / (2.0 * k);
        // One Newton polish on tau(x) = 0 absorbs the rounding of the
        // arcsine route.
        for _ in 0..2 {
            let c = msi_coefficients(p, k, MembranePosition(x));
            let slope = 2.0 * k * denom * (2.0 * k * x).cos();
            if slope.abs() > 0.0 {
                x -= c.tau / slope;
            }
        }
        MembranePosition(x).canonical(p.wavelength)
    });
    Ok(out)
}

/// Phase of rho at `x` on the branch that is continuous in x and equals
/// the principal value at x = 0. Marches from 0 to x accumulating
/// principal phase increments; rho never vanishes for a partly
/// reflective membrane, so modest steps suffice.
pub fn arg_rho_unwrapped(p: &OpticalParams, k: f64, x: MembranePosition) -> f64 {
    let start = msi_coefficients(p, k, MembranePosition(0.0)).rho;
    let mut phase = start.arg();
    let step_limit = p.wavelength / 200.0;
    let n = (x.meters().abs() / step_limit).ceil().max(1.0) as usize;
    let mut prev = start;
    for j in 1..=n {
        let xj = x.meters() * j as f64 / n as f64;
        let cur = msi_coefficients(p, k, MembranePosition(xj)).rho;
        phase += (cur / prev).arg();
        prev = cur;
    }
    phase
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> OpticalParams {
        OpticalParams::reference()
    }

    #[test]
    fn coefficients_at_origin_match_closed_values() {
        let p = reference();
        let c = msi_coefficients(&p, p.wave_number(), MembranePosition(0.0));
        assert!((c.rho.re - 0.41231056256176607).abs() < 1e-12);
        assert!((c.rho.im - 0.9094020013173492).abs() < 1e-12);
        assert!((c.tau - -0.05466260147486579).abs() < 1e-12);
    }

    #[test]
    fn energy_conservation_at_origin() {
        let p = reference();
        let c = msi_coefficients(&p, p.wave_number(), MembranePosition(0.0));
        assert!((c.rho.norm_sqr() + c.tau * c.tau - 1.0).abs() < 1e-14);
    }

    #[test]
    fn closed_form_matches_product() {
        let p = reference();
        let k = p.wave_number();
        for j in 0..50 {
            let x = MembranePosition(p.wavelength * (j as f64 / 50.0 - 0.25));
            let closed = msi_transfer_matrix(&p, k, x);
            let product = msi_transfer_product(&p, k, x);
            assert!(
                closed.max_abs_diff(&product) < 1e-13,
                "mismatch at x = {:?}",
                x
            );
        }
    }

    #[test]
    fn transfer_matrix_structure() {
        let p = reference();
        let k = p.wave_number();
        let x = MembranePosition(7.3e-9);
        let m = msi_transfer_product(&p, k, x);
        // Symmetric and unitary.
        assert!((m.a12 - m.a21).norm() < 1e-14);
        assert!((m * m.adjoint()).max_abs_diff(&ComplexMat2::identity()) < 1e-13);
    }

    #[test]
    fn balanced_splitter_at_origin_has_no_open_port_leakage() {
        let mut p = reference();
        p.bs_refl = 0.5f64.sqrt();
        p.bs_trans = 0.5f64.sqrt();
        let m = msi_transfer_product(&p, p.wave_number(), MembranePosition(0.0));
        assert!(m.a12.norm() < 1e-15);
        assert!(m.a21.norm() < 1e-15);
    }

    #[test]
    fn dark_ports_extinguish_tau() {
        let p = reference();
        let ports = dark_port_offsets(&p).unwrap();
        assert!((ports[0].meters() - 11.278878129469348e-9).abs() < 1e-15);
        assert!((ports[1].meters() - 2.547211218705307e-7).abs() < 1e-14);
        for x in ports {
            let c = msi_coefficients(&p, p.wave_number(), x);
            assert!(c.tau.abs() < 1e-12, "tau = {}", c.tau);
        }
    }

    #[test]
    fn no_dark_port_when_membrane_too_transmissive() {
        let mut p = reference();
        // Nearly fully transmissive membrane cannot offset a 6% asymmetry.
        p.membrane_refl = 0.01;
        p.membrane_trans = (1.0 - 1e-4f64).sqrt();
        assert!(matches!(dark_port_offsets(&p), Err(Error::NoDarkPort)));
    }

    #[test]
    fn coefficients_periodic_in_half_wavelength() {
        let p = reference();
        let k = p.wave_number();
        let x = 37.2e-9;
        let a = msi_coefficients(&p, k, MembranePosition(x));
        let b = msi_coefficients(&p, k, MembranePosition(x + p.wavelength / 2.0));
        assert!((a.rho - b.rho).norm() < 1e-9);
        assert!((a.tau - b.tau).abs() < 1e-9);
    }

    #[test]
    fn unwrapped_phase_is_continuous_and_matches_principal_near_origin() {
        let p = reference();
        let k = p.wave_number();
        let x = MembranePosition(20e-9);
        let direct = msi_coefficients(&p, k, x).rho.arg();
        assert!((arg_rho_unwrapped(&p, k, x) - direct).abs() < 1e-12);
        // For a weakly reflective membrane rho never circles the origin,
        // so a full half-wavelength advance returns the phase unchanged.
        let wound = arg_rho_unwrapped(&p, k, MembranePosition(p.wavelength / 2.0));
        let origin = msi_coefficients(&p, k, MembranePosition(0.0)).rho.arg();
        assert!((wound - origin).abs() < 1e-6);
    }
}
