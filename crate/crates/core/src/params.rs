//! Parameter sets for the interferometer and the mechanical oscillator.

use crate::{Error, Result, HBAR, SPEED_OF_LIGHT};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Optical and geometric parameters of the signal-recycled interferometer.
///
/// All mirror coefficients are field amplitudes, not power coefficients.
/// Lengths are in meters. `srm_loss_sq` is the round-trip power loss of the
/// recycling cavity, lumped into the recycling mirror.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpticalParams {
    /// Membrane amplitude reflectivity.
    pub membrane_refl: f64,
    /// Membrane amplitude transmission.
    pub membrane_trans: f64,
    /// Central beam splitter amplitude reflectivity.
    pub bs_refl: f64,
    /// Central beam splitter amplitude transmission.
    pub bs_trans: f64,
    /// Recycling mirror amplitude reflectivity.
    pub srm_refl: f64,
    /// Recycling mirror amplitude transmission.
    pub srm_trans: f64,
    /// Round-trip power loss lumped into the recycling mirror.
    pub srm_loss_sq: f64,
    /// Vacuum wavelength of the drive laser.
    pub wavelength: f64,
    /// Beam splitter to end mirror distance (folded arm).
    pub arm_length: f64,
    /// Mean beam splitter to membrane distance.
    pub diag_length: f64,
    /// Recycling mirror to beam splitter distance.
    pub srm_distance: f64,
}

impl OpticalParams {
    /// Reference parameter set of the tabletop setup the model targets:
    /// 8.7 cm cavity, 1064 nm drive, 17% power reflectivity membrane,
    /// 6% beam splitter asymmetry, 300 ppm recycling mirror transmission,
    /// 0.5% round-trip loss.
    pub fn reference() -> Self {
        Self {
            membrane_refl: 0.17f64.sqrt(),
            membrane_trans: 0.83f64.sqrt(),
            bs_refl: 0.53f64.sqrt(),
            bs_trans: 0.47f64.sqrt(),
            srm_refl: 0.9997f64.sqrt(),
            srm_trans: 3e-4f64.sqrt(),
            srm_loss_sq: 5e-3,
            wavelength: 1.064e-6,
            arm_length: 0.05,
            diag_length: 0.02,
            srm_distance: 0.017,
        }
    }

    /// Recycling mirror to membrane distance.
    pub fn total_length(&self) -> f64 {
        self.arm_length + self.diag_length + self.srm_distance
    }

    /// Carrier wave number 2 pi / lambda.
    pub fn wave_number(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// Carrier angular frequency.
    pub fn carrier_frequency(&self) -> f64 {
        2.0 * PI * SPEED_OF_LIGHT / self.wavelength
    }

    /// Beam splitter asymmetry r_bs^2 - t_bs^2.
    pub fn bs_asymmetry(&self) -> f64 {
        self.bs_refl * self.bs_refl - self.bs_trans * self.bs_trans
    }

    /// Free spectral range of the recycling cavity in Hz.
    pub fn free_spectral_range(&self) -> f64 {
        SPEED_OF_LIGHT / (2.0 * self.total_length())
    }

    pub fn validate(&self) -> Result<()> {
        let amp_ok = |v: f64| (0.0..=1.0).contains(&v);
        for (name, v) in [
            ("membrane_refl", self.membrane_refl),
            ("membrane_trans", self.membrane_trans),
            ("bs_refl", self.bs_refl),
            ("bs_trans", self.bs_trans),
            ("srm_refl", self.srm_refl),
            ("srm_trans", self.srm_trans),
        ] {
            if !amp_ok(v) {
                return Err(Error::InvalidParams(format!(
                    "{name} = {v} is not an amplitude in [0, 1]"
                )));
            }
        }
        let unitary = |r: f64, t: f64| (r * r + t * t - 1.0).abs() < 1e-9;
        if !unitary(self.membrane_refl, self.membrane_trans) {
            return Err(Error::InvalidParams(
                "membrane amplitudes must satisfy r^2 + t^2 = 1".into(),
            ));
        }
        if !unitary(self.bs_refl, self.bs_trans) {
            return Err(Error::InvalidParams(
                "beam splitter amplitudes must satisfy r^2 + t^2 = 1".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.srm_loss_sq) {
            return Err(Error::InvalidParams("srm_loss_sq must lie in [0, 1)".into()));
        }
        if self.srm_refl * self.srm_refl + self.srm_trans * self.srm_trans > 1.0 + 1e-9 {
            return Err(Error::InvalidParams(
                "recycling mirror must satisfy r^2 + t^2 <= 1".into(),
            ));
        }
        for (name, v) in [
            ("wavelength", self.wavelength),
            ("arm_length", self.arm_length),
            ("diag_length", self.diag_length),
            ("srm_distance", self.srm_distance),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParams(format!("{name} must be positive")));
            }
        }
        Ok(())
    }
}

/// Membrane displacement from the symmetric position, in meters.
///
/// The optical response is periodic in the displacement with period
/// lambda / 2; `canonical` folds a position into [0, lambda / 2).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembranePosition(pub f64);

impl MembranePosition {
    pub fn meters(self) -> f64 {
        self.0
    }

    pub fn canonical(self, wavelength: f64) -> MembranePosition {
        let period = wavelength / 2.0;
        MembranePosition(self.0.rem_euclid(period))
    }
}

/// Mechanical oscillator parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MechanicalParams {
    /// Angular resonance frequency.
    pub frequency: f64,
    /// Intrinsic quality factor.
    pub quality: f64,
    /// Effective mass in kg.
    pub mass: f64,
    /// Bath temperature in K.
    pub bath_temperature: f64,
}

impl MechanicalParams {
    /// 136 kHz membrane mode, Q = 5.8e5, 80 ng, room temperature bath.
    pub fn reference() -> Self {
        Self {
            frequency: 2.0 * PI * 136e3,
            quality: 5.8e5,
            mass: 80e-12,
            bath_temperature: 293.0,
        }
    }

    /// Intrinsic amplitude damping rate omega_m / (2 Q).
    pub fn damping_rate(&self) -> f64 {
        self.frequency / (2.0 * self.quality)
    }

    /// Zero-point position fluctuation sqrt(hbar / (2 m omega_m)).
    pub fn zero_point_amplitude(&self) -> f64 {
        (HBAR / (2.0 * self.mass * self.frequency)).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("frequency", self.frequency),
            ("quality", self.quality),
            ("mass", self.mass),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParams(format!("{name} must be positive")));
            }
        }
        if !(self.bath_temperature >= 0.0 && self.bath_temperature.is_finite()) {
            return Err(Error::InvalidParams("bath_temperature must be non-negative".into()));
        }
        Ok(())
    }
}
