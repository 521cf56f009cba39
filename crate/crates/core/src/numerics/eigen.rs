//! Dense Hermitian eigensolver.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::{czero, lit, norm_sqr, Complex, Real};

/// A dense matrix that is exactly equal to its conjugate transpose.
#[derive(Clone, Debug)]
pub struct HermitianOperator<T: Real> {
    matrix: DMatrix<Complex<T>>,
    real: bool,
}

impl<T: Real> HermitianOperator<T> {
    /// Symmetrizes `matrix` and wraps it. Rejects input whose anti-Hermitian
    /// part exceeds `T::HERMITIAN_TOL` of its Frobenius norm.
    pub fn new(matrix: DMatrix<Complex<T>>) -> Result<Self> {
        let n = matrix.nrows();
        if n == 0 || matrix.ncols() != n {
            return Err(Error::Numeric {
                dimension: n,
                reason: format!("operator must be square, got {}x{}", n, matrix.ncols()),
            });
        }
        let adjoint = matrix.adjoint();
        let scale = frobenius(&matrix);
        let skew = frobenius(&(&matrix - &adjoint));
        if skew > lit::<T>(T::HERMITIAN_TOL) * scale {
            return Err(Error::Numeric {
                dimension: n,
                reason: format!("operator is not Hermitian (|H - H^+| = {skew:e})"),
            });
        }
        let half = lit::<T>(0.5);
        let matrix = (matrix + adjoint).map(|z| z * half);
        let real = matrix.iter().all(|z| z.im == T::zero());
        Ok(Self { matrix, real })
    }

    /// Builds the operator from its upper triangle; the lower one is mirrored.
    pub fn from_upper(dim: usize, mut entry: impl FnMut(usize, usize) -> Complex<T>) -> Result<Self> {
        let mut m = DMatrix::from_element(dim, dim, czero());
        for i in 0..dim {
            for j in i..dim {
                let z = entry(i, j);
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        Self::new(m)
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex<T>> {
        &self.matrix
    }

    /// True when every entry is real and the real-symmetric path is taken.
    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn norm(&self) -> T {
        frobenius(&self.matrix)
    }

    /// `<u| H |v>`.
    pub fn expectation(&self, u: &DVector<Complex<T>>, v: &DVector<Complex<T>>) -> Complex<T> {
        u.dotc(&(&self.matrix * v))
    }
}

/// The lowest eigenpairs of a Hermitian operator, ascending.
#[derive(Clone, Debug)]
pub struct EigenPairs<T: Real> {
    pub values: Vec<T>,
    /// One normalized eigenvector per column.
    pub vectors: DMatrix<Complex<T>>,
}

pub(crate) fn frobenius<T: Real>(m: &DMatrix<Complex<T>>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc + norm_sqr(*z)).sqrt()
}

/// The `k` smallest eigenpairs of `op`.
///
/// Every returned pair satisfies `|Hv - Ev| < T::EIG_RESIDUAL * |H|_F`,
/// otherwise a numeric error is raised.
pub fn hermitian_eig<T: Real>(op: &HermitianOperator<T>, k: usize) -> Result<EigenPairs<T>> {
    let n = op.dimension();
    if k == 0 || k > n {
        return Err(Error::Dimension { dimension: n, requested: k });
    }

    let (values, vectors): (Vec<T>, DMatrix<Complex<T>>) = if op.real {
        let re = op.matrix.map(|z| z.re);
        let eig = SymmetricEigen::try_new(re, T::default_epsilon(), 0).ok_or_else(|| Error::Numeric {
            dimension: n,
            reason: "symmetric QR iteration did not converge".into(),
        })?;
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors.map(|x| Complex::new(x, T::zero())))
    } else {
        let eig = SymmetricEigen::try_new(op.matrix.clone(), T::default_epsilon(), 0).ok_or_else(|| {
            Error::Numeric { dimension: n, reason: "Hermitian QR iteration did not converge".into() }
        })?;
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal));
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric { dimension: n, reason: "non-finite eigenvalue".into() });
    }

    let mut out_vals = Vec::with_capacity(k);
    let mut out_vecs = DMatrix::from_element(n, k, czero());
    let bound = lit::<T>(T::EIG_RESIDUAL) * op.norm().max(T::one());
    for (col, &idx) in order.iter().take(k).enumerate() {
        let v = vectors.column(idx).into_owned();
        let e = values[idx];
        let r = &op.matrix * &v - v.map(|z| z * e);
        let res = r.iter().fold(T::zero(), |acc, z| acc + norm_sqr(*z)).sqrt();
        if !(res < bound) {
            return Err(Error::Numeric {
                dimension: n,
                reason: format!("eigen-residual {res:e} exceeds {bound:e} for level {col}"),
            });
        }
        out_vals.push(e);
        out_vecs.set_column(col, &v);
    }
    Ok(EigenPairs { values: out_vals, vectors: out_vecs })
}
