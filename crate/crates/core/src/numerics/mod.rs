//! Shared numerical kernels.

pub mod bessel;
pub mod eigen;
pub mod integrator;
pub mod spectral;

pub use bessel::{bessel_j, bessel_j_sequence, bessel_zero};
pub use eigen::{hermitian_eig, EigenPairs, HermitianOperator};
pub use integrator::{
    integrate_schrodinger, integrate_with, linspace, ConstantHamiltonian, IntegratorOptions, Method, Schrodinger, Stats,
    Trace,
};
pub use spectral::{dominant_frequency, find_minima, find_peaks, FrequencyEstimate, SpectralOptions};
