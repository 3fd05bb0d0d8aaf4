//! Signal-recycled effective cavity formed by the recycling mirror and the
//! interferometer acting as a compound mirror.
//!
//! The carrier enters through the laser port, couples into the recycled
//! mode through the compound-mirror transmissivity tau, and resonates
//! between the recycling mirror and the interferometer. The membrane
//! position steers both the cavity detuning (through arg rho) and the
//! cavity half-linewidth (through tau^2).

use crate::mat2::ComplexMat2;
use crate::optics::{
    self, elementary_from_phases, msi_coefficients, msi_transfer_from_phases, SegmentPhases,
};
use crate::params::{MembranePosition, OpticalParams};
use crate::{Error, Result, HBAR, SPEED_OF_LIGHT};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Which dark-fringe branch the operating point is referenced to.
///
/// The dark-port condition has two solutions per half-wavelength period;
/// on the lower branch tau grows with x (the membrane sits near a
/// standing-wave node), on the upper branch it falls.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DarkFringeBranch {
    #[default]
    Lower,
    Upper,
}

impl DarkFringeBranch {
    /// Dark-port membrane position of this branch.
    pub fn dark_port(self, p: &OpticalParams) -> Result<MembranePosition> {
        let ports = optics::dark_port_offsets(p)?;
        Ok(match self {
            DarkFringeBranch::Lower => ports[0],
            DarkFringeBranch::Upper => ports[1],
        })
    }
}

/// Power transmittance entering the recycling-mirror linewidth,
/// t_SR^2 + t_loss^2 (round-trip loss lumped into the mirror).
pub fn effective_srm_transmittance(p: &OpticalParams) -> Result<f64> {
    let sum = p.srm_trans * p.srm_trans + p.srm_loss_sq;
    if sum > 1.0 {
        return Err(Error::InvalidParams(format!(
            "t_SR^2 + t_loss^2 = {sum} exceeds 1"
        )));
    }
    Ok(sum)
}

/// Round-trip amplitude reflectivity of the recycling mirror with the
/// lumped loss folded in, r_SR sqrt(1 - t_loss^2). This is the value the
/// cavity denominator and all field matrices use, so the resonance width
/// stays consistent with [`linewidths`].
pub fn effective_srm_reflectivity(p: &OpticalParams) -> f64 {
    p.srm_refl * (1.0 - p.srm_loss_sq).sqrt()
}

/// Cavity half-linewidths in rad/s.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Linewidths {
    /// Recycling mirror contribution, c (t_SR^2 + t_loss^2) / (4 L).
    pub srm: f64,
    /// Compound mirror contribution, c tau^2 / (4 L).
    pub msi: f64,
    pub total: f64,
}

pub fn linewidths(p: &OpticalParams, x: MembranePosition) -> Linewidths {
    let total_len = p.total_length();
    let tau = msi_coefficients(p, p.wave_number(), x).tau;
    let srm = SPEED_OF_LIGHT * (p.srm_trans * p.srm_trans + p.srm_loss_sq) / (4.0 * total_len);
    let msi = SPEED_OF_LIGHT * tau * tau / (4.0 * total_len);
    Linewidths {
        srm,
        msi,
        total: srm + msi,
    }
}

/// Cavity finesse, free spectral range over full linewidth.
pub fn finesse(p: &OpticalParams, x: MembranePosition) -> f64 {
    p.free_spectral_range() * PI / linewidths(p, x).total
}

/// Detuning split into recycling-mirror and interferometer parts, rad/s.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Detunings {
    /// From the recycling mirror displacement, -omega_0 dL / L.
    pub srm: f64,
    /// From the membrane offset and beam splitter asymmetry.
    pub msi: f64,
    pub total: f64,
}

/// Phase of rho at the dark port of the given branch (principal value).
pub fn dark_port_phase(p: &OpticalParams, branch: DarkFringeBranch) -> Result<f64> {
    let x = branch.dark_port(p)?;
    Ok(msi_coefficients(p, p.wave_number(), x).rho.arg())
}

fn srm_detuning(p: &OpticalParams, srm_displacement: f64) -> f64 {
    -p.carrier_frequency() * srm_displacement / p.total_length()
}

/// Detunings from the small-parameter expansion in k0 dl and epsilon_BS.
///
/// The expansion is taken around the membrane symmetry point of the given
/// branch; it degrades for k0 dl beyond a few 0.1 rad, where
/// [`exact_detuning`] should be used instead.
pub fn detunings(
    p: &OpticalParams,
    x: MembranePosition,
    srm_displacement: f64,
    branch: DarkFringeBranch,
) -> Detunings {
    let eps = p.bs_asymmetry();
    let rm = p.membrane_refl;
    let tm = p.membrane_trans;
    let theta = 2.0 * p.wave_number() * x.meters();
    let (theta, sign) = match branch {
        DarkFringeBranch::Lower => (theta, 1.0),
        DarkFringeBranch::Upper => (theta - PI, -1.0),
    };
    let bracket =
        sign * (-rm * tm * theta * theta / 2.0 + rm * tm * eps * eps / 2.0) - rm * rm * eps * theta;
    let msi = SPEED_OF_LIGHT / (2.0 * p.total_length()) * bracket;
    let srm = srm_detuning(p, srm_displacement);
    Detunings {
        srm,
        msi,
        total: srm + msi,
    }
}

/// Detunings without expansion: the interferometer part is read off the
/// exact phase of rho relative to the dark-port phase of the branch.
pub fn exact_detuning(
    p: &OpticalParams,
    x: MembranePosition,
    srm_displacement: f64,
    branch: DarkFringeBranch,
) -> Result<Detunings> {
    let phi_dp = dark_port_phase(p, branch)?;
    let phase = optics::arg_rho_unwrapped(p, p.wave_number(), x);
    // Compare against the nearest 2 pi image of the dark-port phase so a
    // canonicalized position does not pick up a spurious FSR offset.
    let dphi = wrap_to_pi(phase - phi_dp);
    let msi = -SPEED_OF_LIGHT * dphi / (2.0 * p.total_length());
    let srm = srm_detuning(p, srm_displacement);
    Ok(Detunings {
        srm,
        msi,
        total: srm + msi,
    })
}

fn wrap_to_pi(phi: f64) -> f64 {
    (phi + PI).rem_euclid(2.0 * PI) - PI
}

/// Inverse resonance factor D = 1 - r_eff |rho(x)| exp(2i (Delta + Omega) L / c).
pub fn resonance_factor(
    p: &OpticalParams,
    x: MembranePosition,
    delta: f64,
    omega: f64,
) -> Complex64 {
    let rho = msi_coefficients(p, p.wave_number(), x).rho;
    let phase = 2.0 * (delta + omega) * p.total_length() / SPEED_OF_LIGHT;
    Complex64::new(1.0, 0.0)
        - Complex64::from_polar(effective_srm_reflectivity(p) * rho.norm(), phase)
}

/// Combined cavity figures at one membrane and recycling mirror position.
#[derive(Clone, Copy, Debug)]
pub struct CavityResponse {
    /// Inverse resonance factor D at the carrier (Omega = 0).
    pub denominator: Complex64,
    pub linewidths: Linewidths,
    pub detunings: Detunings,
    pub finesse: f64,
    /// Free spectral range, Hz.
    pub fsr: f64,
}

pub fn cavity_response(
    p: &OpticalParams,
    x: MembranePosition,
    srm_displacement: f64,
    branch: DarkFringeBranch,
) -> Result<CavityResponse> {
    let det = exact_detuning(p, x, srm_displacement, branch)?;
    Ok(CavityResponse {
        denominator: resonance_factor(p, x, det.total, 0.0),
        linewidths: linewidths(p, x),
        detunings: det,
        finesse: finesse(p, x),
        fsr: p.free_spectral_range(),
    })
}

/// Segment phasors of the recycled setup at sideband frequency Omega.
#[derive(Clone, Copy, Debug)]
pub struct CavityPhases {
    pub segments: SegmentPhases,
    /// Recycling mirror to beam splitter propagation phasor.
    pub srm: Complex64,
}

/// A fully resolved operating point: membrane position, recycling mirror
/// detuning, input power and branch.
///
/// The absolute propagation phases of the real setup are enormous
/// multiples of 2 pi; only their values modulo 2 pi matter. The operating
/// point stores reduced per-segment phases chosen so that the total
/// round-trip phase encodes exactly the configured detuning, and every
/// derived matrix (closed form or product form) composes the same phasor
/// values.
#[derive(Clone, Copy, Debug)]
pub struct OperatingPoint {
    pub optics: OpticalParams,
    pub position: MembranePosition,
    /// Input power at the interferometer, W.
    pub input_power: f64,
    pub branch: DarkFringeBranch,
    pub detuning: Detunings,
    kappa_arm: f64,
    kappa_diag: f64,
    kappa_srm: f64,
}

impl OperatingPoint {
    /// Operating point from a recycling mirror displacement off the
    /// dark-port resonance.
    pub fn with_srm_displacement(
        p: &OpticalParams,
        x: MembranePosition,
        srm_displacement: f64,
        input_power: f64,
        branch: DarkFringeBranch,
    ) -> Result<Self> {
        p.validate()?;
        if !(input_power >= 0.0 && input_power.is_finite()) {
            return Err(Error::InvalidParams("input power must be non-negative".into()));
        }
        let detuning = exact_detuning(p, x, srm_displacement, branch)?;
        Self::build(p, x, input_power, branch, detuning)
    }

    /// Operating point at a prescribed total detuning; the recycling
    /// mirror contribution is chosen to make up the difference from the
    /// membrane-induced part.
    pub fn with_total_detuning(
        p: &OpticalParams,
        x: MembranePosition,
        delta_total: f64,
        input_power: f64,
        branch: DarkFringeBranch,
    ) -> Result<Self> {
        p.validate()?;
        if !(input_power >= 0.0 && input_power.is_finite()) {
            return Err(Error::InvalidParams("input power must be non-negative".into()));
        }
        let msi_part = exact_detuning(p, x, 0.0, branch)?.msi;
        let detuning = Detunings {
            srm: delta_total - msi_part,
            msi: msi_part,
            total: delta_total,
        };
        Self::build(p, x, input_power, branch, detuning)
    }

    fn build(
        p: &OpticalParams,
        x: MembranePosition,
        input_power: f64,
        branch: DarkFringeBranch,
        detuning: Detunings,
    ) -> Result<Self> {
        let two_pi = 2.0 * PI;
        let k0 = p.wave_number();
        let phi_dp = dark_port_phase(p, branch)?;
        let kappa_arm = (k0 * p.arm_length).rem_euclid(two_pi);
        let kappa_diag = (k0 * p.diag_length).rem_euclid(two_pi);
        // Fix the recycling segment phase so the carrier round trip
        // accumulates phi_DP + 2 delta_SR L / c, i.e. the cavity is on
        // resonance at the branch dark port when delta_SR = 0.
        let target = phi_dp + 2.0 * detuning.srm * p.total_length() / SPEED_OF_LIGHT;
        let kappa_srm = target / 2.0 - kappa_arm - kappa_diag;
        Ok(Self {
            optics: *p,
            position: x,
            input_power,
            branch,
            detuning,
            kappa_arm,
            kappa_diag,
            kappa_srm,
        })
    }

    /// Phasors of all four segments at sideband frequency Omega (rad/s,
    /// 0 for the carrier).
    pub fn phases(&self, omega: f64) -> CavityPhases {
        let p = &self.optics;
        let kk = omega / SPEED_OF_LIGHT;
        let k0x = p.wave_number() * self.position.meters();
        let x = self.position.meters();
        CavityPhases {
            segments: SegmentPhases {
                arm: Complex64::from_polar(1.0, self.kappa_arm + kk * p.arm_length),
                diag_short: Complex64::from_polar(
                    1.0,
                    self.kappa_diag - k0x + kk * (p.diag_length - x),
                ),
                diag_long: Complex64::from_polar(
                    1.0,
                    self.kappa_diag + k0x + kk * (p.diag_length + x),
                ),
            },
            srm: Complex64::from_polar(1.0, self.kappa_srm + kk * p.srm_distance),
        }
    }

    /// Round-trip phasor exp(2ikL) of the full cavity at sideband Omega.
    pub fn roundtrip_phasor(&self, omega: f64) -> Complex64 {
        let ph = self.phases(omega);
        let half = ph.segments.arm * ph.srm;
        half * half * ph.segments.diag_short * ph.segments.diag_long
    }

    /// Inverse resonance factor D(Omega) = 1 - r_eff rho* exp(2ikL).
    pub fn denominator(&self, omega: f64) -> Complex64 {
        let ph = self.phases(omega);
        let rho = self.coefficients_at(&ph).rho;
        Complex64::new(1.0, 0.0)
            - effective_srm_reflectivity(&self.optics) * rho.conj() * self.roundtrip_phasor(omega)
    }

    fn coefficients_at(&self, ph: &CavityPhases) -> optics::MsiCoefficients {
        // Rebuild rho from the same difference phasor the matrices use.
        optics::coefficients_from_difference(&self.optics, ph.segments.difference())
    }

    /// Compound-mirror transfer matrix at sideband Omega.
    pub fn msi_matrix(&self, omega: f64) -> ComplexMat2 {
        msi_transfer_from_phases(&self.optics, &self.phases(omega).segments)
    }

    /// Resolvent (I - P_R R_R P_R M_MS)^-1 at sideband Omega, by direct
    /// 2x2 inversion.
    pub fn recycling_matrix(&self, omega: f64) -> ComplexMat2 {
        let ph = self.phases(omega);
        let mms = msi_transfer_from_phases(&self.optics, &ph.segments);
        let loop_refl = self.srm_loop(&ph) * mms;
        let sys = ComplexMat2::identity() - loop_refl;
        // |D| >= 1 - r_eff |rho| > 0 for a transmissive or lossy mirror.
        sys.inverse().expect("cavity denominator cannot vanish")
    }

    /// P_R R_R P_R with the loss-folded reflectivity.
    fn srm_loop(&self, ph: &CavityPhases) -> ComplexMat2 {
        let z = Complex64::new(0.0, 0.0);
        ComplexMat2::diag(
            z,
            effective_srm_reflectivity(&self.optics) * ph.srm * ph.srm,
        )
    }

    /// Input amplitude in sqrt(photon flux) units.
    pub fn input_amplitude(&self) -> f64 {
        (self.input_power / (HBAR * self.optics.carrier_frequency())).sqrt()
    }

    pub fn linewidths(&self) -> Linewidths {
        linewidths(&self.optics, self.position)
    }

    /// Steady-state carrier fields.
    pub fn steady_state_fields(&self) -> MeanFields {
        let p = &self.optics;
        let ph = self.phases(0.0);
        let elem = elementary_from_phases(p, &ph.segments);
        let mms = msi_transfer_from_phases(p, &ph.segments);
        let k = self.recycling_matrix(0.0);
        let one = Complex64::new(1.0, 0.0);
        let pr = ComplexMat2::diag(one, ph.srm);
        let tr = ComplexMat2::diag(one, Complex64::new(p.srm_trans, 0.0));
        let a_in = Complex64::new(self.input_amplitude(), 0.0);
        let input = [a_in, Complex64::new(0.0, 0.0)];
        let at_beamsplitter = (k * pr * tr).mul_vec(input);
        let incident = (elem.diag_propagation * elem.arm_propagation * elem.beamsplitter)
            .mul_vec(at_beamsplitter);
        let reflected = elem.membrane.mul_vec(incident);
        let transmitted = p.srm_trans * ph.srm * mms.mul_vec(at_beamsplitter)[1];
        MeanFields {
            input: a_in.re,
            at_beamsplitter,
            incident_on_membrane: incident,
            reflected_off_membrane: reflected,
            transmitted,
        }
    }

    /// Power leaving through the recycling mirror divided by input power.
    pub fn transmitted_power_normalized(&self) -> f64 {
        let f = self.steady_state_fields();
        if f.input == 0.0 {
            return 0.0;
        }
        f.transmitted.norm_sqr() / (f.input * f.input)
    }
}

/// Carrier field amplitudes, sqrt(photon flux) units.
#[derive(Clone, Copy, Debug)]
pub struct MeanFields {
    /// Real input amplitude at the laser port.
    pub input: f64,
    /// Fields entering the beam splitter from the recycling side.
    pub at_beamsplitter: [Complex64; 2],
    /// Fields incident on the two membrane surfaces.
    pub incident_on_membrane: [Complex64; 2],
    /// Fields leaving the two membrane surfaces.
    pub reflected_off_membrane: [Complex64; 2],
    /// Field exiting through the recycling mirror.
    pub transmitted: Complex64,
}

/// Membrane position on the chosen branch where tau takes the requested
/// value. The lower branch maps tau monotonically through its arcsine
/// range; positions are canonicalized to [0, lambda/2).
pub fn position_for_tau(
    p: &OpticalParams,
    tau: f64,
    branch: DarkFringeBranch,
) -> Result<MembranePosition> {
    let denom = 2.0 * p.membrane_refl * p.bs_refl * p.bs_trans;
    if denom == 0.0 {
        return Err(Error::InvalidParams(
            "membrane or beam splitter is non-reflective; tau is constant".into(),
        ));
    }
    let s = (tau + p.membrane_trans * p.bs_asymmetry()) / denom;
    if s.abs() > 1.0 {
        return Err(Error::InvalidParams(format!(
            "tau = {tau} is outside the reachable range"
        )));
    }
    let theta = match branch {
        DarkFringeBranch::Lower => s.asin(),
        DarkFringeBranch::Upper => PI - s.asin(),
    };
    Ok(MembranePosition(theta / (2.0 * p.wave_number())).canonical(p.wavelength))
}

/// Membrane position where gamma_MSI / gamma_SR equals `ratio`, on the
/// requested side of the dark port (`negative_tau` selects the tau < 0
/// flank).
pub fn position_for_linewidth_ratio(
    p: &OpticalParams,
    ratio: f64,
    negative_tau: bool,
    branch: DarkFringeBranch,
) -> Result<MembranePosition> {
    if ratio < 0.0 {
        return Err(Error::InvalidParams("linewidth ratio must be non-negative".into()));
    }
    let tau_sq = ratio * (p.srm_trans * p.srm_trans + p.srm_loss_sq);
    let tau = if negative_tau { -tau_sq.sqrt() } else { tau_sq.sqrt() };
    position_for_tau(p, tau, branch)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> OpticalParams {
        OpticalParams::reference()
    }

    #[test]
    fn dark_port_linewidth_and_finesse() {
        let p = reference();
        let dp = DarkFringeBranch::Lower.dark_port(&p).unwrap();
        let lw = linewidths(&p, dp);
        assert!(lw.msi.abs() < 1e-12 * lw.srm);
        assert!((lw.total / (2.0 * PI) - 0.7266703834470056e6).abs() < 1.0);
        let f = finesse(&p, dp);
        assert!((f - 1185.4).abs() < 1.0);
    }

    #[test]
    fn linewidth_upper_end_at_matched_tau() {
        let p = reference();
        let x = position_for_linewidth_ratio(&p, 1.0, false, DarkFringeBranch::Lower).unwrap();
        let lw = linewidths(&p, x);
        assert!((lw.msi / lw.srm - 1.0).abs() < 1e-10);
        assert!((lw.total / (2.0 * PI) / 1.45334e6 - 1.0).abs() < 1e-4);
    }

    #[test]
    fn srm_detuning_is_linear_in_displacement() {
        let p = reference();
        let dl = p.wavelength / 1000.0;
        let d = detunings(&p, MembranePosition(0.0), dl, DarkFringeBranch::Lower);
        let expected = -p.carrier_frequency() * dl / p.total_length();
        assert!((d.srm - expected).abs() < 1e-3);
        // omega_0 lambda = 2 pi c, so this is -2 pi c / (1000 L).
        assert!((d.srm + 2.0 * PI * SPEED_OF_LIGHT / (1000.0 * p.total_length())).abs() < 1.0);
    }

    #[test]
    fn expanded_msi_detuning_at_origin() {
        let p = reference();
        let d = detunings(&p, MembranePosition(0.0), 0.0, DarkFringeBranch::Lower);
        let eps = p.bs_asymmetry();
        let expected = SPEED_OF_LIGHT / (2.0 * p.total_length())
            * (p.membrane_refl * p.membrane_trans * eps * eps / 2.0);
        assert!((d.msi - expected).abs() < 1e-6 * expected.abs());
        assert!(d.msi > 0.0);
    }

    #[test]
    fn exact_detuning_vanishes_at_dark_port() {
        let p = reference();
        for branch in [DarkFringeBranch::Lower, DarkFringeBranch::Upper] {
            let dp = branch.dark_port(&p).unwrap();
            let d = exact_detuning(&p, dp, 0.0, branch).unwrap();
            assert!(d.msi.abs() < 1e-3, "msi detuning {} at {:?}", d.msi, branch);
        }
    }

    #[test]
    fn balanced_splitter_origin_detuning_is_pure_srm() {
        let mut p = reference();
        p.bs_refl = 0.5f64.sqrt();
        p.bs_trans = 0.5f64.sqrt();
        let dl = 3.0e-10;
        let d = exact_detuning(&p, MembranePosition(0.0), dl, DarkFringeBranch::Lower).unwrap();
        assert!(d.msi.abs() < 1e-9 * d.srm.abs());
    }

    #[test]
    fn exact_and_expanded_agree_in_small_offset_regime() {
        let mut p = reference();
        p.bs_refl = 0.5f64.sqrt();
        p.bs_trans = 0.5f64.sqrt();
        let k0 = p.wave_number();
        for frac in [0.2, 0.5, 1.0] {
            let x = MembranePosition(0.05 * frac / (2.0 * k0));
            let exact = exact_detuning(&p, x, 0.0, DarkFringeBranch::Lower).unwrap().msi;
            let expanded = detunings(&p, x, 0.0, DarkFringeBranch::Lower).msi;
            assert!(
                ((exact - expanded) / exact).abs() < 1e-3,
                "k0 dl = {}: exact {exact}, expanded {expanded}",
                0.1 * frac
            );
        }
    }

    #[test]
    fn resonance_factor_limits() {
        let p = reference();
        let dp = DarkFringeBranch::Lower.dark_port(&p).unwrap();
        let d0 = resonance_factor(&p, dp, 0.0, 0.0);
        assert!(d0.im.abs() < 1e-15);
        let rho_mag = msi_coefficients(&p, p.wave_number(), dp).rho.norm();
        assert!((d0.re - (1.0 - effective_srm_reflectivity(&p) * rho_mag)).abs() < 1e-15);
        let mut open = p;
        open.srm_refl = 0.0;
        open.srm_trans = 1.0;
        open.srm_loss_sq = 0.0;
        let d = resonance_factor(&open, dp, 1e6, 3e5);
        assert!((d - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn denominator_matches_analytic_resonance_factor() {
        let p = reference();
        let x = MembranePosition(16.0e-9);
        let op =
            OperatingPoint::with_srm_displacement(&p, x, 2.0e-10, 0.02, DarkFringeBranch::Lower)
                .unwrap();
        for omega in [0.0, 2.0 * PI * 136e3, -2.0 * PI * 136e3, 4.0e6] {
            let direct = op.denominator(omega);
            let analytic = resonance_factor(&p, x, op.detuning.total, omega);
            assert!(
                (direct - analytic).norm() < 1e-10,
                "omega {omega}: {direct} vs {analytic}"
            );
        }
    }

    #[test]
    fn denominator_width_matches_linewidths() {
        let p = reference();
        let x = position_for_linewidth_ratio(&p, 0.5, false, DarkFringeBranch::Lower).unwrap();
        let lw = linewidths(&p, x);
        // |D|^2 doubles relative to its minimum at Delta = +/- gamma.
        let on = resonance_factor(&p, x, 0.0, 0.0).norm_sqr();
        let off = resonance_factor(&p, x, lw.total, 0.0).norm_sqr();
        assert!((off / on - 2.0).abs() < 0.04, "ratio {}", off / on);
    }

    #[test]
    fn recycling_matrix_closed_form_structure() {
        // K_MSR = D^-1 [[D, 0], [i tau r e^{2ikL}, 1]].
        let p = reference();
        let op = OperatingPoint::with_srm_displacement(
            &p,
            MembranePosition(20.0e-9),
            1.0e-10,
            0.02,
            DarkFringeBranch::Lower,
        )
        .unwrap();
        let omega = 8.5e5;
        let k = op.recycling_matrix(omega);
        let d = op.denominator(omega);
        let ph = op.phases(omega);
        let tau = op.coefficients_at(&ph).tau;
        let closed = ComplexMat2::new(
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, tau) * effective_srm_reflectivity(&p) * op.roundtrip_phasor(omega)
                / d,
            Complex64::new(1.0, 0.0) / d,
        );
        // Near resonance |1/D| is large, so compare relative to its size.
        let scale = 1.0 + closed.a22.norm();
        assert!(
            k.max_abs_diff(&closed) < 1e-12 * scale,
            "diff {:e}",
            k.max_abs_diff(&closed)
        );
    }

    #[test]
    fn mean_fields_scale_with_sqrt_power() {
        let p = reference();
        let x = MembranePosition(16.0e-9);
        let lo = OperatingPoint::with_total_detuning(&p, x, 0.0, 0.01, DarkFringeBranch::Lower)
            .unwrap()
            .steady_state_fields();
        let hi = OperatingPoint::with_total_detuning(&p, x, 0.0, 0.04, DarkFringeBranch::Lower)
            .unwrap()
            .steady_state_fields();
        for i in 0..2 {
            assert!((hi.at_beamsplitter[i] - 2.0 * lo.at_beamsplitter[i]).norm() < 1e-9);
        }
        // Membrane is lossless: |B| = |A|.
        let a: f64 = lo.incident_on_membrane.iter().map(|v| v.norm_sqr()).sum();
        let b: f64 = lo.reflected_off_membrane.iter().map(|v| v.norm_sqr()).sum();
        assert!((a - b).abs() < 1e-9 * a);
    }

    #[test]
    fn open_cavity_fields_are_single_pass() {
        let mut p = reference();
        p.srm_refl = 0.0;
        p.srm_trans = 1.0;
        p.srm_loss_sq = 0.0;
        let x = MembranePosition(16.0e-9);
        let op =
            OperatingPoint::with_srm_displacement(&p, x, 0.0, 0.02, DarkFringeBranch::Lower)
                .unwrap();
        let f = op.steady_state_fields();
        let ph = op.phases(0.0);
        let elem = elementary_from_phases(&p, &ph.segments);
        let single = (elem.diag_propagation * elem.arm_propagation * elem.beamsplitter)
            .mul_vec([Complex64::new(f.input, 0.0), Complex64::new(0.0, 0.0)]);
        for (got, want) in f.incident_on_membrane.iter().zip(&single) {
            assert!((got - want).norm() < 1e-9);
        }
    }

    #[test]
    fn impedance_matched_lossless_transmission_is_unity() {
        let mut p = reference();
        p.srm_loss_sq = 0.0;
        let x = position_for_linewidth_ratio(&p, 1.0, false, DarkFringeBranch::Lower).unwrap();
        let op = OperatingPoint::with_total_detuning(&p, x, 0.0, 0.02, DarkFringeBranch::Lower)
            .unwrap();
        let t = op.transmitted_power_normalized();
        assert!((t - 1.0).abs() < 1e-3, "transmission {t}");
    }

    #[test]
    fn position_for_tau_round_trip() {
        let p = reference();
        for target in [-0.05, -0.01, 0.0, 0.02, 0.0728] {
            for branch in [DarkFringeBranch::Lower, DarkFringeBranch::Upper] {
                let x = position_for_tau(&p, target, branch).unwrap();
                let tau = msi_coefficients(&p, p.wave_number(), x).tau;
                assert!((tau - target).abs() < 1e-12, "{target} {branch:?} -> {tau}");
            }
        }
    }
}
