//! Phonon spectra of a ring Coulomb chain and the Ramsey visibility of a spin
//! embedded in it.
//!
//! All models are generic over the floating point type ([`num::Real`], `f32`
//! or `f64`); the aliases at the crate root fix `f64`.

// `!(x > 0)` deliberately rejects NaN alongside non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod cli;
pub mod error;
pub mod fit;
pub mod linear_modes;
pub mod model;
pub mod num;
pub mod ramsey;
pub mod spectral;
pub mod zigzag_modes;

pub use error::{ChainError, Result};
pub use linear_modes::{ModeIndex, Parity};
pub use num::Real;

pub type ChainParams = model::ChainParams<f64>;
pub type GapParams = model::GapParams<f64>;
pub type ModeSet = linear_modes::ModeSet<f64>;
pub type ModeMatrix = linear_modes::ModeMatrix<f64>;
pub type DisplacementAmplitudes = ramsey::DisplacementAmplitudes<f64>;
pub type VisibilityTrace = ramsey::VisibilityTrace<f64>;
pub type ZigzagSpectrum = zigzag_modes::ZigzagSpectrum<f64>;
pub type FourierSpectrum = spectral::FourierSpectrum<f64>;
