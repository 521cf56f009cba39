//! Scalar abstraction shared by every kernel in the crate.
//!
//! All physics is written against [`Real`]; `f64` is the working precision
//! and every tolerance quoted in the tests assumes it. `f32` is supported for
//! the pieces that do not need double precision (quick sweeps, plotting).

use std::fmt::{Debug, Display, LowerExp};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

pub use nalgebra::Complex;

/// Floating point scalar usable by the solvers: `f32` or `f64`.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Relative asymmetry a constructed Hermitian operator may carry before it
    /// is rejected.
    const HERMITIAN_TOL: f64;
    /// Eigen-residual bound relative to the Frobenius norm of the operator.
    const EIG_RESIDUAL: f64;
}

impl Real for f64 {
    const HERMITIAN_TOL: f64 = 1e-14;
    const EIG_RESIDUAL: f64 = 1e-10;
}

impl Real for f32 {
    const HERMITIAN_TOL: f64 = 1e-5;
    const EIG_RESIDUAL: f64 = 1e-4;
}

/// Converts an `f64` literal into the working scalar.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

/// Converts a count into the working scalar.
#[inline]
pub fn from_usize<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("usize representable in scalar type")
}

#[inline]
pub fn from_i64<T: Real>(n: i64) -> T {
    T::from_i64(n).expect("i64 representable in scalar type")
}

#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[inline]
pub fn cplx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[inline]
pub fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

/// `exp(i·phase)`.
#[inline]
pub fn cis<T: Real>(phase: T) -> Complex<T> {
    Complex::new(phase.cos(), phase.sin())
}

#[inline]
pub fn norm_sqr<T: Real>(z: Complex<T>) -> T {
    z.re * z.re + z.im * z.im
}

/// `exp(iπx)`, exact at multiples of one half.
pub fn cispi<T: Real>(x: T) -> Complex<T> {
    let two_x = x * lit(2.0);
    if two_x == two_x.round() {
        let k = to_f64(two_x).rem_euclid(4.0) as i64;
        let (re, im) = match k {
            0 => (1.0, 0.0),
            1 => (0.0, 1.0),
            2 => (-1.0, 0.0),
            _ => (0.0, -1.0),
        };
        return Complex::new(lit(re), lit(im));
    }
    cis(x * T::pi())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cispi_is_exact_on_half_integers() {
        assert_eq!(cispi(1.0f64), Complex::new(-1.0, 0.0));
        assert_eq!(cispi(-0.5f64), Complex::new(0.0, -1.0));
        assert_eq!(cispi(3.0f64), Complex::new(-1.0, 0.0));
        assert!((cispi(0.3f64) - cis(0.3 * std::f64::consts::PI)).norm() < 1e-16);
    }
}
