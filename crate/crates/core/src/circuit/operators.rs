//! Sparse Fourier-space couplings of the Hamiltonian and current operators.

use nalgebra::{DMatrix, DVector};

use super::{CircuitParams, FourierBasis, KINETIC_M, KINETIC_P};
use crate::error::Result;
use crate::numerics::HermitianOperator;
use crate::scalar::{cispi, cplx, czero, lit, Complex, Real};

/// Operator stored as `(row, column, value)` triples.
#[derive(Clone, Debug)]
pub struct SparseOperator<T: Real> {
    pub dim: usize,
    pub entries: Vec<(usize, usize, Complex<T>)>,
}

impl<T: Real> SparseOperator<T> {
    pub fn apply(&self, v: &DVector<Complex<T>>) -> DVector<Complex<T>> {
        let mut out = DVector::from_element(self.dim, czero());
        for &(r, c, z) in &self.entries {
            out[r] += z * v[c];
        }
        out
    }

    /// `<u| O |v>`.
    pub fn element(&self, u: &DVector<Complex<T>>, v: &DVector<Complex<T>>) -> Complex<T> {
        self.entries.iter().fold(czero(), |acc, &(r, c, z)| acc + u[r].conj() * z * v[c])
    }

    pub fn to_dense(&self) -> DMatrix<Complex<T>> {
        let mut m = DMatrix::from_element(self.dim, self.dim, czero());
        for &(r, c, z) in &self.entries {
            m[(r, c)] += z;
        }
        m
    }

    /// Matrix of the operator between the columns of `states`.
    pub fn project(&self, states: &DMatrix<Complex<T>>) -> DMatrix<Complex<T>> {
        let k = states.ncols();
        let cols: Vec<DVector<Complex<T>>> = (0..k).map(|j| self.apply(&states.column(j).into_owned())).collect();
        DMatrix::from_fn(k, k, |i, j| states.column(i).dotc(&cols[j]))
    }
}

/// Shifts `(dp, dm, amplitude)` of an operator that is a trigonometric
/// polynomial in the phases.
fn assemble<T: Real>(basis: &FourierBasis, terms: &[(i32, i32, Complex<T>)]) -> SparseOperator<T> {
    let mut entries = Vec::new();
    for (col, &(p, m)) in basis.modes().iter().enumerate() {
        for &(dp, dm, z) in terms {
            if let Some(row) = basis.position(p + dp, m + dm) {
                entries.push((row, col, z));
            }
        }
    }
    SparseOperator { dim: basis.len(), entries }
}

/// `sin(2πf + 2φ_m)` as shifts of `n_m` by `±2`.
fn shifted_sine<T: Real>(f: T, scale: T) -> [(i32, i32, Complex<T>); 2] {
    let up = cispi(f * lit(2.0));
    // s·e^{is2πf}/(2i) = -i·s·e^{is2πf}/2
    let half = scale * lit(0.5);
    let plus = Complex::new(up.im, -up.re) * half;
    let minus = Complex::new(up.im, up.re) * half;
    [(0, 2, plus), (0, -2, minus)]
}

/// Static Hamiltonian in units of `E_c`.
pub fn build_hamiltonian<T: Real>(params: &CircuitParams<T>) -> Result<HermitianOperator<T>> {
    params.validate()?;
    let basis = FourierBasis::new(params.truncation);
    Ok(hamiltonian_in(&basis, params)?)
}

pub(crate) fn hamiltonian_in<T: Real>(basis: &FourierBasis, params: &CircuitParams<T>) -> Result<HermitianOperator<T>> {
    let ej = params.ej_over_ec;
    let alpha = params.alpha;
    let mass_m = lit::<T>(KINETIC_M) / (T::one() + alpha * lit(2.0));
    let offset = ej * lit(2.0) + alpha * ej;

    let hop = cplx(-ej * lit(0.5), T::zero());
    let phase = cispi(params.f * lit(2.0));
    let amp = -(alpha * ej * lit(0.5));
    let terms = [
        (1, 1, hop),
        (1, -1, hop),
        (-1, 1, hop),
        (-1, -1, hop),
        (0, 2, phase * amp),
        (0, -2, phase.conj() * amp),
    ];
    let mut m = assemble(basis, &terms).to_dense();
    for (i, &(p, q)) in basis.modes().iter().enumerate() {
        let (p, q) = (lit::<T>(p as f64), lit::<T>(q as f64));
        m[(i, i)] += cplx(lit::<T>(KINETIC_P) * p * p + mass_m * q * q + offset, T::zero());
    }
    HermitianOperator::new(m)
}

/// `α/(2α+1)·[2 sin φ_p cos φ_m − sin(2πf + 2φ_m)]` in units of `I_0`.
pub fn loop_current_operator<T: Real>(params: &CircuitParams<T>) -> SparseOperator<T> {
    loop_current_in(&FourierBasis::new(params.truncation), params)
}

pub(crate) fn loop_current_in<T: Real>(basis: &FourierBasis, params: &CircuitParams<T>) -> SparseOperator<T> {
    let c = params.alpha / (params.alpha * lit(2.0) + T::one());
    // 2 sin φ_p cos φ_m: each (±1, ±1) shift carries dp/(2i)
    let h = c * lit(0.5);
    let mut terms = vec![
        (1, 1, cplx(T::zero(), -h)),
        (1, -1, cplx(T::zero(), -h)),
        (-1, 1, cplx(T::zero(), h)),
        (-1, -1, cplx(T::zero(), h)),
    ];
    terms.extend(shifted_sine(params.f, -c));
    assemble(basis, &terms)
}

/// The single-junction current `α sin(2πf + 2φ_m)` in units of `I_0`.
pub fn third_junction_operator<T: Real>(params: &CircuitParams<T>) -> SparseOperator<T> {
    third_junction_in(&FourierBasis::new(params.truncation), params)
}

pub(crate) fn third_junction_in<T: Real>(basis: &FourierBasis, params: &CircuitParams<T>) -> SparseOperator<T> {
    assemble(basis, &shifted_sine(params.f, params.alpha))
}
