//! Model of a signal-recycled Michelson-Sagnac interferometer with a
//! translucent membrane in the beam crossing.
//!
//! The membrane position sets both the cavity resonance frequency
//! (dispersive coupling) and the cavity linewidth (dissipative coupling).
//! The crate builds the interferometer transfer matrices, folds in the
//! recycling mirror, and derives radiation-pressure back-action, effective
//! mechanical quality factors, coupling rates and noise spectra from them.
//!
//! Modules are layered bottom-up:
//! - [`mat2`], [`params`], [`optics`]: elementary 2x2 field matrices and the
//!   bare interferometer.
//! - [`cavity`]: recycling cavity response, detunings, linewidths, mean
//!   fields at an operating point.
//! - [`backaction`]: optical spring and damping, stability, noise spectra.
//! - [`couplings`]: dispersive and dissipative coupling rates.
//! - [`config`], [`sweep`], [`table`]: run configuration, parameter sweeps
//!   and tabular output.

pub mod backaction;
pub mod cavity;
pub mod config;
pub mod couplings;
pub mod error;
pub mod mat2;
pub mod optics;
pub mod params;
pub mod sweep;
pub mod table;

pub use error::Error;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;

pub type Result<T> = std::result::Result<T, Error>;
