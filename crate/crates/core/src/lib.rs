//! Flux-qubit spectra, driven two-level dynamics and qubit–oscillator
//! simulations.
//!
//! Every kernel is generic over [`Real`] (`f32` or `f64`). The aliases at the
//! crate root fix the scalar to `f64`, the precision all tolerances assume.

pub mod bath;
pub mod circuit;
pub mod drive;
pub mod error;
pub mod numerics;
pub mod oscillator;
pub mod scalar;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub use scalar::{Complex, Real};

pub type CircuitParams = circuit::CircuitParams<f64>;
pub type SpectralResult = circuit::SpectralResult<f64>;
pub type HermitianOperator = numerics::HermitianOperator<f64>;

pub type CircuitParamsF32 = circuit::CircuitParams<f32>;
pub type SpectralResultF32 = circuit::SpectralResult<f32>;
pub type DriveParams = drive::DriveParams<f64>;
pub type TwoLevelState = drive::TwoLevelState<f64>;
pub type BathSpec = bath::BathSpec<f64>;
pub type OscillatorParams = oscillator::OscillatorParams<f64>;
pub type EffectiveModel = oscillator::EffectiveModel<f64>;
