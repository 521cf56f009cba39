use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::operators::{hamiltonian_in, loop_current_in, third_junction_in};
use super::{CircuitParams, FourierBasis};
use crate::error::{Error, Result};
use crate::numerics::hermitian_eig;
use crate::scalar::{czero, lit, norm_sqr, to_f64, Complex, Real};

/// Eigenvalues closer than this (in `E_c`) are treated as degenerate.
const DEGENERACY_GAP: f64 = 1e-10;
/// Smallest `|<i|Π|i>|` accepted as a definite parity.
const PARITY_CUTOFF: f64 = 0.99;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Clone, Debug)]
pub struct SpectralResult<T: Real> {
    pub params: CircuitParams<T>,
    pub f: T,
    /// Ascending, in units of `E_c`.
    pub energies: Vec<T>,
    /// Fourier coefficients, one level per column, indexed by `basis`.
    pub states: DMatrix<Complex<T>>,
    pub basis: FourierBasis,
    /// Loop-current matrix `I_ij` in units of `I_0`.
    pub current_elements: DMatrix<Complex<T>>,
    /// Matrix of the single-junction current `α sin(2πf + 2φ_m)`.
    pub third_junction_elements: DMatrix<Complex<T>>,
    pub parity: Option<Vec<Parity>>,
}

impl<T: Real> SpectralResult<T> {
    pub fn n_levels(&self) -> usize {
        self.energies.len()
    }

    pub fn state(&self, level: usize) -> DVector<Complex<T>> {
        self.states.column(level).into_owned()
    }

    /// Coefficient of `exp(i(n_p φ_p + n_m φ_m))` in `level`; zero outside
    /// the basis.
    pub fn coefficient(&self, level: usize, n_p: i32, n_m: i32) -> Complex<T> {
        self.basis.position(n_p, n_m).map_or(czero(), |i| self.states[(i, level)])
    }

    /// The coefficients of `level` on the full `(2N+1)²` grid, rows by `n_p`.
    pub fn grid(&self, level: usize) -> DMatrix<Complex<T>> {
        let n = self.basis.truncation() as i32;
        let side = (2 * n + 1) as usize;
        DMatrix::from_fn(side, side, |r, c| self.coefficient(level, r as i32 - n, c as i32 - n))
    }

    /// `<i|Π|i>` for every level, with Π the inversion `(n_p, n_m) → (-n_p, -n_m)`.
    pub fn parity_expectations(&self) -> Vec<T> {
        (0..self.n_levels()).map(|l| inversion_expectation(&self.basis, &self.states.column(l).into_owned())).collect()
    }

    fn flip(&mut self, level: usize) {
        let minus = -T::one();
        self.states.column_mut(level).iter_mut().for_each(|z| *z *= minus);
        for m in [&mut self.current_elements, &mut self.third_junction_elements] {
            m.row_mut(level).iter_mut().for_each(|z| *z *= minus);
            m.column_mut(level).iter_mut().for_each(|z| *z *= minus);
        }
    }
}

fn inversion_expectation<T: Real>(basis: &FourierBasis, v: &DVector<Complex<T>>) -> T {
    (0..basis.len()).fold(czero::<T>(), |acc, i| acc + v[i].conj() * v[basis.inverted(i)]).re
}

/// Multiplies `v` by the phase that makes its largest coefficient real and
/// positive. Among near-equal maxima the first in basis order wins.
fn fix_phase<T: Real>(v: &mut DVector<Complex<T>>) -> usize {
    let mags: Vec<T> = v.iter().map(|z| norm_sqr(*z)).collect();
    let top = mags.iter().copied().fold(T::zero(), |a, b| a.max(b));
    let lead = mags.iter().position(|&m| m >= top * lit(1.0 - 1e-9)).unwrap_or(0);
    let z = v[lead];
    let r = norm_sqr(z).sqrt();
    if r > T::zero() {
        let phase = z.conj() / r;
        v.iter_mut().for_each(|c| *c *= phase);
    }
    lead
}

/// Lowest `params.n_levels` eigenpairs with gauge-fixed eigenvectors and the
/// current matrices between them.
pub fn diagonalize<T: Real>(params: &CircuitParams<T>) -> Result<SpectralResult<T>> {
    params.validate()?;
    let basis = FourierBasis::new(params.truncation);
    let k = params.n_levels;
    if k > basis.len() {
        return Err(Error::Dimension { dimension: basis.len(), requested: k });
    }
    let h = hamiltonian_in(&basis, params)?;
    let eig = hermitian_eig(&h, k)?;

    let mut levels: Vec<(T, DVector<Complex<T>>, usize, T)> = (0..k)
        .map(|c| {
            let mut v = eig.vectors.column(c).into_owned();
            let lead = fix_phase(&mut v);
            let parity = inversion_expectation(&basis, &v);
            (eig.values[c], v, lead, parity)
        })
        .collect();

    // deterministic order inside degenerate clusters
    let mut start = 0;
    while start < k {
        let mut end = start + 1;
        while end < k && to_f64(levels[end].0 - levels[end - 1].0) < DEGENERACY_GAP {
            end += 1;
        }
        levels[start..end].sort_by(|a, b| {
            b.3.partial_cmp(&a.3).unwrap_or(std::cmp::Ordering::Equal).then(a.2.cmp(&b.2))
        });
        start = end;
    }

    let energies = levels.iter().map(|l| l.0).collect();
    let mut states = DMatrix::from_element(basis.len(), k, czero());
    for (c, l) in levels.iter().enumerate() {
        states.set_column(c, &l.1);
    }
    let current_elements = loop_current_in(&basis, params).project(&states);
    let third_junction_elements = third_junction_in(&basis, params).project(&states);
    let mut result = SpectralResult {
        params: *params,
        f: params.f,
        energies,
        states,
        basis,
        current_elements,
        third_junction_elements,
        parity: None,
    };
    if params.at_optimal_point() {
        result.parity = parity_classification(&result).ok();
    }
    Ok(result)
}

fn check_match<T: Real>(params: &CircuitParams<T>, result: &SpectralResult<T>) -> Result<FourierBasis> {
    let p = &result.params;
    if p.alpha != params.alpha
        || p.ej_over_ec != params.ej_over_ec
        || p.f != params.f
        || p.truncation != params.truncation
    {
        return Err(Error::Consistency("states were computed for different circuit parameters".into()));
    }
    let basis = FourierBasis::new(params.truncation);
    if result.states.nrows() != basis.len() {
        return Err(Error::Consistency(format!(
            "states have {} coefficients, basis has {}",
            result.states.nrows(),
            basis.len()
        )));
    }
    Ok(basis)
}

/// `I_ij` of the loop-current operator between the states of `result`.
pub fn loop_current_matrix<T: Real>(
    params: &CircuitParams<T>,
    result: &SpectralResult<T>,
) -> Result<DMatrix<Complex<T>>> {
    let basis = check_match(params, result)?;
    Ok(loop_current_in(&basis, params).project(&result.states))
}

/// Matrix elements of the single-junction current `α sin(2πf + 2φ_m)`.
pub fn third_junction_current_matrix<T: Real>(
    params: &CircuitParams<T>,
    result: &SpectralResult<T>,
) -> Result<DMatrix<Complex<T>>> {
    let basis = check_match(params, result)?;
    Ok(third_junction_in(&basis, params).project(&result.states))
}

/// Inversion parity of every level. Only defined at `f = 1/2`.
pub fn parity_classification<T: Real>(result: &SpectralResult<T>) -> Result<Vec<Parity>> {
    if !result.params.at_optimal_point() {
        return Err(Error::ParityUndefined { f: to_f64(result.f) });
    }
    result
        .parity_expectations()
        .into_iter()
        .enumerate()
        .map(|(level, p)| {
            let e = to_f64(p);
            if e.abs() < PARITY_CUTOFF {
                Err(Error::ParityMixed { level, expectation: e.abs() })
            } else if e > 0.0 {
                Ok(Parity::Even)
            } else {
                Ok(Parity::Odd)
            }
        })
        .collect()
}

/// Diagonalizes at every `f` and aligns eigenvector signs between
/// neighbouring points, so that matrix-element curves are continuous.
pub fn flux_sweep<T: Real>(base: &CircuitParams<T>, f_values: &[T], n_levels: usize) -> Result<Vec<SpectralResult<T>>> {
    if let Some(f) = f_values.iter().find(|f| !(**f > T::zero() && **f < T::one())) {
        return Err(Error::InvalidParameter(format!("flux {f} outside (0, 1)")));
    }
    let template = CircuitParams { n_levels, ..*base };
    let mut out: Vec<SpectralResult<T>> =
        f_values.par_iter().map(|&f| diagonalize(&template.at_flux(f))).collect::<Result<_>>()?;
    for i in 1..out.len() {
        let (head, tail) = out.split_at_mut(i);
        let prev = &head[i - 1];
        let cur = &mut tail[0];
        for level in 0..n_levels {
            let overlap = prev.states.column(level).dotc(&cur.states.column(level));
            if overlap.re < T::zero() {
                cur.flip(level);
            }
        }
    }
    Ok(out)
}
