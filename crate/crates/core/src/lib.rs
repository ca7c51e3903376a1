//! Matter-wave interferometry of particles with an internal mass spectrum.
//!
//! Natural units (ħ = c = 1) throughout.

pub mod error;
pub mod labframe;
pub mod measurement;
pub mod quadrature;
pub mod visibility;
pub mod wavepacket;
pub mod worldline;

pub use error::{Error, Result};
