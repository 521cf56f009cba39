//! Three-junction flux qubit in a plane-wave basis.
//!
//! Wavefunctions are expanded in `exp(i(n_p φ_p + n_m φ_m))` with
//! `|n_p|, |n_m| <= N`. Only the sector `n_p + n_m` even is kept: it is the
//! one that is 2π-periodic in the junction phases `φ_1 = φ_p + φ_m` and
//! `φ_2 = φ_p - φ_m`. Energies are in units of `E_c`, currents in units of
//! `I_0 = 2π E_J / Φ_0`.

mod operators;
mod spectrum;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

pub use operators::{build_hamiltonian, loop_current_operator, third_junction_operator, SparseOperator};
pub use spectrum::{
    diagonalize, flux_sweep, loop_current_matrix, parity_classification, third_junction_current_matrix, Parity,
    SpectralResult,
};

/// Kinetic prefactors of `n_p²` and `n_m²`. The `n_m` one is divided by
/// `1 + 2α`.
pub const KINETIC_P: f64 = 2.0;
pub const KINETIC_M: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams<T> {
    /// Third-junction to main-junction Josephson energy ratio.
    pub alpha: T,
    pub ej_over_ec: T,
    /// Reduced flux `Φ_e / Φ_0`.
    pub f: T,
    pub truncation: usize,
    pub n_levels: usize,
}

impl<T: Real> Default for CircuitParams<T> {
    fn default() -> Self {
        Self { alpha: lit(0.8), ej_over_ec: lit(40.0), f: lit(0.5), truncation: 12, n_levels: 5 }
    }
}

impl<T: Real> CircuitParams<T> {
    pub fn at_flux(mut self, f: T) -> Self {
        self.f = f;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > T::zero() && self.alpha < T::one()) {
            return Err(Error::InvalidParameter(format!("alpha = {} outside (0, 1)", self.alpha)));
        }
        if !(self.ej_over_ec > T::zero()) || !self.ej_over_ec.is_finite() {
            return Err(Error::InvalidParameter(format!("E_J/E_c = {} must be positive", self.ej_over_ec)));
        }
        if !self.f.is_finite() {
            return Err(Error::InvalidParameter("flux must be finite".into()));
        }
        if self.truncation < 4 {
            return Err(Error::InvalidParameter(format!("truncation {} below 4", self.truncation)));
        }
        let side = 2 * self.truncation + 1;
        let cap = side * side / 4;
        if self.n_levels == 0 || self.n_levels > cap {
            return Err(Error::Dimension { dimension: cap, requested: self.n_levels });
        }
        Ok(())
    }

    /// True when `f` is within 1e-12 of one half.
    pub fn at_optimal_point(&self) -> bool {
        (to_f64(self.f) - 0.5).abs() <= 1e-12
    }
}

/// Index set of the plane-wave basis.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierBasis {
    truncation: i32,
    modes: Vec<(i32, i32)>,
    index: HashMap<(i32, i32), usize>,
}

impl FourierBasis {
    pub fn new(truncation: usize) -> Self {
        let n = truncation as i32;
        let modes: Vec<(i32, i32)> = (-n..=n)
            .flat_map(|p| (-n..=n).map(move |m| (p, m)))
            .filter(|(p, m)| (p + m).rem_euclid(2) == 0)
            .collect();
        let index = modes.iter().enumerate().map(|(i, &k)| (k, i)).collect();
        Self { truncation: n, modes, index }
    }

    pub fn truncation(&self) -> usize {
        self.truncation as usize
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// `(n_p, n_m)` of basis vector `i`.
    pub fn mode(&self, i: usize) -> (i32, i32) {
        self.modes[i]
    }

    pub fn modes(&self) -> &[(i32, i32)] {
        &self.modes
    }

    pub fn position(&self, n_p: i32, n_m: i32) -> Option<usize> {
        self.index.get(&(n_p, n_m)).copied()
    }

    /// Index of `(-n_p, -n_m)`.
    pub fn inverted(&self, i: usize) -> usize {
        let (p, m) = self.modes[i];
        self.index[&(-p, -m)]
    }
}
