//! Bessel functions of the first kind, integer order.
//!
//! Power series below `x = 4`, Miller's downward recurrence normalized with
//! the sum rule `J_0 + 2·Σ J_2k = 1` above it. Both branches hold 1e-12
//! absolute accuracy in `f64` across the supported envelope
//! `|n| <= 60`, `|x| <= 60`.

use crate::error::{Error, Result};
use crate::scalar::{from_usize, lit, Real};

pub const MAX_ORDER: u32 = 60;
pub const MAX_ARGUMENT: f64 = 60.0;
/// Largest `k` accepted by [`bessel_zero`].
pub const MAX_ZERO_INDEX: usize = 20;

const SERIES_LIMIT: f64 = 4.0;
const RESCALE_AT: f64 = 1e10;

/// `J_n(x)` for integer `n` and real `x`.
///
/// Negative orders and arguments are folded onto `n, x >= 0` through
/// `J_{-n} = (-1)^n J_n` and `J_n(-x) = (-1)^n J_n(x)`.
pub fn bessel_j<T: Real>(n: i32, x: T) -> Result<T> {
    let order = n.unsigned_abs();
    check_envelope(order, x)?;
    let odd = order % 2 == 1;
    let mut sign = T::one();
    if n < 0 && odd {
        sign = -sign;
    }
    let ax = x.abs();
    if x < T::zero() && odd {
        sign = -sign;
    }
    Ok(sign * bessel_j_nonneg(order as usize, ax))
}

/// `[J_0(x), J_1(x), ..., J_{max_order}(x)]` in one pass.
pub fn bessel_j_sequence<T: Real>(max_order: u32, x: T) -> Result<Vec<T>> {
    check_envelope(max_order, x)?;
    let ax = x.abs();
    let mut out = if ax == T::zero() {
        let mut v = vec![T::zero(); max_order as usize + 1];
        v[0] = T::one();
        v
    } else if ax < lit(SERIES_LIMIT) {
        (0..=max_order as usize).map(|k| series(k, ax)).collect()
    } else {
        miller(max_order as usize, ax)
    };
    if x < T::zero() {
        for (k, v) in out.iter_mut().enumerate() {
            if k % 2 == 1 {
                *v = -*v;
            }
        }
    }
    Ok(out)
}

fn check_envelope<T: Real>(order: u32, x: T) -> Result<()> {
    if order > MAX_ORDER {
        return Err(Error::Range(format!("Bessel order {order} exceeds {MAX_ORDER}")));
    }
    if !(x.abs() <= lit(MAX_ARGUMENT)) {
        return Err(Error::Range(format!("Bessel argument {x} outside |x| <= {MAX_ARGUMENT}")));
    }
    Ok(())
}

fn bessel_j_nonneg<T: Real>(n: usize, x: T) -> T {
    if x == T::zero() {
        return if n == 0 { T::one() } else { T::zero() };
    }
    if x < lit(SERIES_LIMIT) {
        series(n, x)
    } else {
        miller(n, x)[n]
    }
}

/// `Σ_k (-1)^k (x/2)^(2k+n) / (k! (k+n)!)`.
fn series<T: Real>(n: usize, x: T) -> T {
    let half = x / lit(2.0);
    let mut term = T::one();
    for j in 1..=n {
        term *= half / from_usize(j);
    }
    let q = -(half * half);
    let mut sum = term;
    let eps = T::default_epsilon();
    for k in 1..400usize {
        term *= q / (from_usize::<T>(k) * from_usize::<T>(k + n));
        sum += term;
        if term.abs() <= eps * sum.abs() * lit(0.01) && from_usize::<T>(k) > half {
            break;
        }
    }
    sum
}

/// Downward recurrence from well above `max(n, x)`; returns `J_0..=J_n`.
fn miller<T: Real>(n: usize, x: T) -> Vec<T> {
    let xf = crate::scalar::to_f64(x);
    let top = (n as f64).max(xf.ceil());
    let mut start = (top + 20.0 + (40.0 * top).sqrt()) as usize;
    start += start % 2;

    let two = lit::<T>(2.0);
    let mut out = vec![T::zero(); n + 1];
    let mut above = T::zero();
    let mut current = lit::<T>(1e-30);
    // J_0 + 2 (J_2 + J_4 + ...)
    let mut norm = T::zero();
    for k in (1..=start).rev() {
        let below = two * from_usize::<T>(k) / x * current - above;
        above = current;
        current = below;
        let idx = k - 1;
        if idx <= n {
            out[idx] = current;
        }
        if idx % 2 == 0 {
            norm += if idx == 0 { current } else { two * current };
        }
        if current.abs() > lit(RESCALE_AT) {
            let s = lit::<T>(1.0 / RESCALE_AT);
            current *= s;
            above *= s;
            norm *= s;
            for v in out.iter_mut() {
                *v *= s;
            }
        }
    }
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

/// The `k`-th positive zero of `J_n`, located by a sign-change scan and
/// refined by bisection to machine precision.
pub fn bessel_zero<T: Real>(n: i32, k: usize) -> Result<T> {
    if k == 0 || k > MAX_ZERO_INDEX {
        return Err(Error::Range(format!("zero index {k} outside 1..={MAX_ZERO_INDEX}")));
    }
    let order = n.unsigned_abs() as i32;
    let step = lit::<T>(0.05);
    let limit = lit::<T>(MAX_ARGUMENT);
    let mut lo = step;
    let mut f_lo = bessel_j(order, lo)?;
    let mut found = 0;
    loop {
        let hi = lo + step;
        if hi > limit {
            return Err(Error::Range(format!(
                "zero {k} of J_{n} lies beyond the evaluator envelope x <= {MAX_ARGUMENT}"
            )));
        }
        let f_hi = bessel_j(order, hi)?;
        if f_hi == T::zero() || f_lo * f_hi < T::zero() {
            found += 1;
            if found == k {
                return bisect(order, lo, hi, f_lo);
            }
        }
        lo = hi;
        f_lo = f_hi;
    }
}

fn bisect<T: Real>(n: i32, mut lo: T, mut hi: T, mut f_lo: T) -> Result<T> {
    let half = lit::<T>(0.5);
    for _ in 0..200 {
        let mid = (lo + hi) * half;
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = bessel_j(n, mid)?;
        if f_mid == T::zero() {
            return Ok(mid);
        }
        if f_lo * f_mid < T::zero() {
            hi = mid;
        } else {
            lo = mid;
            f_lo = f_mid;
        }
    }
    Ok((lo + hi) * half)
}
