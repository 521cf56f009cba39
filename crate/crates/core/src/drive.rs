//! A two-level system under simultaneous transverse and longitudinal drive,
//!
//! `H(t) = ω_q/2·σ_z + (λ_x σ_x + λ_z σ_z) cos(ω₀ t)`,
//!
//! with `σ_z|0⟩ = -|0⟩` and `σ_z|1⟩ = |1⟩`. Multi-photon resonances sit at
//! `ω_q = (n+1) ω₀` and are weighted by Bessel functions of
//! `x = 2λ_z/ω₀`.

use nalgebra::ComplexField;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::SpectralResult;
use crate::error::{Error, Result};
use crate::numerics::{bessel_j, find_minima, find_peaks, integrate_with, IntegratorOptions, Schrodinger, Stats};
use crate::scalar::{cis, cplx, czero, from_i64, lit, norm_sqr, to_f64, Complex, Real};

pub use crate::numerics::bessel_zero;

/// Population a scan point must exceed to count as a resonance.
pub const PEAK_THRESHOLD: f64 = 0.5;
/// Half-width of the strict-maximum window used by scans.
pub const PEAK_WINDOW: usize = 2;
/// Integration steps per drive period, at least.
pub const STEPS_PER_PERIOD: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveParams<T> {
    pub omega_q: T,
    pub lambda_x: T,
    pub lambda_z: T,
    pub omega_0: T,
}

impl<T: Real> DriveParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega_q > T::zero()) || !self.omega_q.is_finite() {
            return Err(Error::InvalidParameter(format!("omega_q = {} must be positive", self.omega_q)));
        }
        if !(self.omega_0 > T::zero()) || !self.omega_0.is_finite() {
            return Err(Error::InvalidParameter(format!("omega_0 = {} must be positive", self.omega_0)));
        }
        if !self.lambda_x.is_finite() || !self.lambda_z.is_finite() {
            return Err(Error::InvalidParameter("drive amplitudes must be finite".into()));
        }
        Ok(())
    }

    /// `2λ_z/ω₀`.
    pub fn bessel_argument(&self) -> T {
        lit::<T>(2.0) * self.lambda_z / self.omega_0
    }

    /// `Δ_n = ω_q - (n+1) ω₀`.
    pub fn detuning(&self, n: i32) -> T {
        self.omega_q - from_i64::<T>(n as i64 + 1) * self.omega_0
    }

    pub fn period(&self) -> T {
        T::two_pi() / self.omega_0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoLevelState<T: Real> {
    /// Amplitude on `|0⟩`.
    pub a: Complex<T>,
    /// Amplitude on `|1⟩`.
    pub b: Complex<T>,
}

impl<T: Real> TwoLevelState<T> {
    pub fn new(a: Complex<T>, b: Complex<T>) -> Result<Self> {
        let s = Self { a, b };
        let n = to_f64(s.norm_sqr());
        if !((n - 1.0).abs() <= 1e-9) {
            return Err(Error::Normalization { norm_sqr: n });
        }
        Ok(s)
    }

    pub fn ground() -> Self {
        Self { a: cplx(T::one(), T::zero()), b: czero() }
    }

    pub fn excited() -> Self {
        Self { a: czero(), b: cplx(T::one(), T::zero()) }
    }

    pub fn norm_sqr(&self) -> T {
        norm_sqr(self.a) + norm_sqr(self.b)
    }

    pub fn excited_population(&self) -> T {
        norm_sqr(self.b)
    }
}

/// Drive parameters read off a circuit spectrum.
///
/// `phi_amplitude` is the flux drive amplitude in units where
/// `Φ·I₀` is measured in `E_c`, so all rates come out in `E_c/ħ`. The
/// identity part `Φ(I_00 + I_11)/2` only shifts a global phase and is
/// returned by [`identity_coupling`].
pub fn qubit_params_from_spectrum<T: Real>(
    spec: &SpectralResult<T>,
    phi_amplitude: T,
    omega_0: T,
) -> Result<DriveParams<T>> {
    if spec.n_levels() < 2 {
        return Err(Error::Arity { needed: 2, got: spec.n_levels() });
    }
    let i = &spec.current_elements;
    let p = DriveParams {
        omega_q: spec.energies[1] - spec.energies[0],
        lambda_x: phi_amplitude * norm_sqr(i[(0, 1)]).sqrt(),
        lambda_z: phi_amplitude * (i[(1, 1)].re - i[(0, 0)].re) / lit(2.0),
        omega_0,
    };
    p.validate()?;
    Ok(p)
}

/// `Φ(I_00 + I_11)/2`.
pub fn identity_coupling<T: Real>(spec: &SpectralResult<T>, phi_amplitude: T) -> Result<T> {
    if spec.n_levels() < 2 {
        return Err(Error::Arity { needed: 2, got: spec.n_levels() });
    }
    let i = &spec.current_elements;
    Ok(phi_amplitude * (i[(0, 0)].re + i[(1, 1)].re) / lit(2.0))
}

/// Rotates `εσ_z + Δσ_x + λ cos(ω₀t) σ_z` into its energy eigenbasis.
pub fn current_basis_to_qubit_basis<T: Real>(epsilon: T, delta: T, lambda: T, omega_0: T) -> Result<DriveParams<T>> {
    let e = epsilon.hypot(delta);
    if e == T::zero() {
        return Err(Error::Degenerate("epsilon = delta = 0 has no qubit axis".into()));
    }
    let p = DriveParams {
        omega_q: lit::<T>(2.0) * e,
        lambda_x: -lambda * delta / e,
        lambda_z: lambda * epsilon / e,
        omega_0,
    };
    p.validate()?;
    Ok(p)
}

/// How the `n`-photon coupling is derived from the Jacobi–Anger expansion.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SidebandRule {
    /// `λ_x J_n(x)`.
    #[default]
    LeadingBessel,
    /// `λ_x (J_n(x) + J_{n+2}(x)) / 2`, keeping both halves of the
    /// transverse cosine. This is the stationary term of `H(t)` at
    /// `ω_q = (n+1)ω₀`, equal to `λ_x (n+1) J_{n+1}(x)/x`.
    FullCosine,
}

/// `λ_n = λ_x J_n(2λ_z/ω₀)`.
pub fn sideband_amplitude<T: Real>(n: i32, p: &DriveParams<T>) -> Result<T> {
    sideband_amplitude_with(n, p, SidebandRule::LeadingBessel)
}

pub fn sideband_amplitude_with<T: Real>(n: i32, p: &DriveParams<T>, rule: SidebandRule) -> Result<T> {
    let x = p.bessel_argument();
    match rule {
        SidebandRule::LeadingBessel => Ok(p.lambda_x * bessel_j(n, x)?),
        SidebandRule::FullCosine => Ok(p.lambda_x * (bessel_j(n, x)? + bessel_j(n + 2, x)?) / lit(2.0)),
    }
}

/// Closed-form solution of the `n`-photon rotating-wave Hamiltonian
/// `-Δ_n/2·|0⟩⟨0| + Δ_n/2·|1⟩⟨1| + λ_n σ_x`.
///
/// Amplitudes are in the frame rotating at `(n+1)ω₀`; populations coincide
/// with the lab frame.
pub fn rwa_amplitudes<T: Real>(
    p: &DriveParams<T>,
    n: i32,
    a0: Complex<T>,
    b0: Complex<T>,
    t: T,
) -> Result<TwoLevelState<T>> {
    rwa_amplitudes_with(p, n, a0, b0, t, SidebandRule::LeadingBessel)
}

pub fn rwa_amplitudes_with<T: Real>(
    p: &DriveParams<T>,
    n: i32,
    a0: Complex<T>,
    b0: Complex<T>,
    t: T,
    rule: SidebandRule,
) -> Result<TwoLevelState<T>> {
    let s0 = TwoLevelState::new(a0, b0)?;
    let lambda = sideband_amplitude_with(n, p, rule)?;
    let delta = p.detuning(n);
    let two = lit::<T>(2.0);
    let omega = (delta * delta + two * two * lambda * lambda).sqrt();
    if omega == T::zero() {
        return Ok(s0);
    }
    let (s, c) = (omega * t / two).sin_cos();
    let i = cplx(T::zero(), T::one());
    let dz = delta / omega;
    let dx = two * lambda / omega;
    let a = (cplx(c, T::zero()) + i * (s * dz)) * a0 - i * (s * dx) * b0;
    let b = -i * (s * dx) * a0 + (cplx(c, T::zero()) - i * (s * dz)) * b0;
    Ok(TwoLevelState { a, b })
}

/// `H(t)` in the frame of its `σ_z` part.
struct DrivenQubit<T> {
    p: DriveParams<T>,
}

impl<T: Real> Schrodinger<T> for DrivenQubit<T> {
    fn dim(&self) -> usize {
        2
    }

    fn frame_phases(&self, t: T, out: &mut [T]) {
        let p = &self.p;
        let th = p.omega_q * t / lit(2.0) + p.lambda_z * (p.omega_0 * t).sin() / p.omega_0;
        out[0] = -th;
        out[1] = th;
    }

    fn apply(&self, t: T, psi: &[Complex<T>], out: &mut [Complex<T>]) {
        let v = self.p.lambda_x * (self.p.omega_0 * t).cos();
        out[0] = psi[1] * v;
        out[1] = psi[0] * v;
    }
}

#[derive(Clone, Debug)]
pub struct QubitTrace<T: Real> {
    pub times: Vec<T>,
    pub states: Vec<TwoLevelState<T>>,
    pub stats: Stats,
}

impl<T: Real> QubitTrace<T> {
    pub fn excited_population(&self) -> Vec<T> {
        self.states.iter().map(|s| s.excited_population()).collect()
    }
}

/// Default options for the driven qubit: local tolerance `1e-10`, at least
/// [`STEPS_PER_PERIOD`] steps per drive period.
pub fn drive_options<T: Real>(p: &DriveParams<T>) -> IntegratorOptions<T> {
    IntegratorOptions::with_tol(lit(1e-10)).max_step(p.period() / lit(STEPS_PER_PERIOD as f64))
}

fn check_grid<T: Real>(t_grid: &[T]) -> Result<()> {
    match t_grid.first() {
        Some(t0) if *t0 == T::zero() => Ok(()),
        Some(t0) => Err(Error::InvalidParameter(format!("time grid must start at 0, starts at {t0}"))),
        None => Err(Error::InvalidParameter("empty time grid".into())),
    }
}

/// Integrates `H(t)` without any rotating-wave approximation.
pub fn evolve_exact<T: Real>(p: &DriveParams<T>, s0: &TwoLevelState<T>, t_grid: &[T]) -> Result<QubitTrace<T>> {
    evolve_exact_with(p, s0, t_grid, &drive_options(p))
}

pub fn evolve_exact_with<T: Real>(
    p: &DriveParams<T>,
    s0: &TwoLevelState<T>,
    t_grid: &[T],
    opts: &IntegratorOptions<T>,
) -> Result<QubitTrace<T>> {
    p.validate()?;
    check_grid(t_grid)?;
    let s0 = TwoLevelState::new(s0.a, s0.b)?;
    let mut times = Vec::with_capacity(t_grid.len());
    let mut states = Vec::with_capacity(t_grid.len());
    let stats = integrate_with(&DrivenQubit { p: *p }, &[s0.a, s0.b], t_grid, opts, |t, psi| {
        times.push(t);
        states.push(TwoLevelState { a: psi[0], b: psi[1] });
    })?;
    Ok(QubitTrace { times, states, stats })
}

/// Largest excited population over `0 <= t <= horizon`, starting in `|0⟩`,
/// sampled `samples_per_period` times per drive period.
pub fn max_excited_population<T: Real>(p: &DriveParams<T>, horizon: T, samples_per_period: usize) -> Result<T> {
    p.validate()?;
    if !(horizon > T::zero()) {
        return Err(Error::InvalidParameter(format!("horizon {horizon} must be positive")));
    }
    let dt = p.period() / lit(samples_per_period.max(1) as f64);
    let steps = to_f64(horizon / dt).ceil() as usize;
    let grid: Vec<T> = (0..=steps).map(|k| (dt * lit(k as f64)).min(horizon)).collect();
    let g = TwoLevelState::<T>::ground();
    let mut best = T::zero();
    integrate_with(&DrivenQubit { p: *p }, &[g.a, g.b], &grid, &drive_options(p), |_, psi| {
        best = best.max(norm_sqr(psi[1]));
    })?;
    Ok(best)
}

/// The two Floquet states of the driven qubit near the `n`-photon resonance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dressing<T: Real> {
    /// Quasi-energies in the frame rotating at `(n+1)ω₀`, folded into
    /// `(-ω₀/2, ω₀/2]`; `[lower, upper]`.
    pub quasi_energies: [T; 2],
    /// `upper - lower`: the dressed splitting `Ω_R`.
    pub splitting: T,
    /// Floquet states at `t = 0` in the bare basis; `[dressed ground,
    /// dressed excited]`.
    pub states: [TwoLevelState<T>; 2],
}

/// Diagonalizes the one-period propagator of `H(t)`. Exact in the drive,
/// no rotating-wave approximation.
pub fn floquet_dressing<T: Real>(p: &DriveParams<T>, n: i32) -> Result<Dressing<T>> {
    p.validate()?;
    if n < 0 {
        return Err(Error::InvalidParameter(format!("photon index {n} must be >= 0")));
    }
    let period = p.period();
    let opts = IntegratorOptions::with_tol(lit(1e-12)).max_step(period / lit(200.0));
    let sys = DrivenQubit { p: *p };
    let mut u = [[czero::<T>(); 2]; 2];
    for (col, start) in [[cplx(T::one(), T::zero()), czero()], [czero(), cplx(T::one(), T::zero())]].iter().enumerate() {
        integrate_with(&sys, start, &[T::zero(), period], &opts, |t, psi| {
            if t == period {
                u[0][col] = psi[0];
                u[1][col] = psi[1];
            }
        })?;
    }
    // remove the (n+1)-fold free rotation, which is -1 per photon over one period
    if n % 2 == 0 {
        for row in u.iter_mut() {
            for z in row.iter_mut() {
                *z = -*z;
            }
        }
    }
    let half_tr = (u[0][0] + u[1][1]) * lit::<T>(0.5);
    let det = u[0][0] * u[1][1] - u[0][1] * u[1][0];
    let root = ComplexField::sqrt(half_tr * half_tr - det);
    let mu = [half_tr + root, half_tr - root];
    let mut pairs: Vec<(T, TwoLevelState<T>)> = mu
        .iter()
        .map(|&m| {
            let eps = -m.argument() / period;
            let (x, y) = if norm_sqr(u[0][1]) >= norm_sqr(u[1][0]) && norm_sqr(u[0][1]) > T::zero() {
                (u[0][1], m - u[0][0])
            } else if norm_sqr(u[1][0]) > T::zero() {
                (m - u[1][1], u[1][0])
            } else if norm_sqr(m - u[0][0]) < norm_sqr(m - u[1][1]) {
                (cplx(T::one(), T::zero()), czero())
            } else {
                (czero(), cplx(T::one(), T::zero()))
            };
            let norm = (norm_sqr(x) + norm_sqr(y)).sqrt();
            (eps, TwoLevelState { a: x / norm, b: y / norm })
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    Ok(Dressing {
        quasi_energies: [pairs[0].0, pairs[1].0],
        splitting: pairs[1].0 - pairs[0].0,
        states: [pairs[0].1, pairs[1].1],
    })
}

/// How `λ_z` is set at each point of an `ω₀` scan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Longitudinal<T> {
    /// Fixed `λ_z`.
    Amplitude(T),
    /// Fixed `x = 2λ_z/ω₀`.
    Ratio(T),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanPoint<T> {
    /// `ω₀` for spectroscopy, `x` for transparency.
    pub control: T,
    pub max_population: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Resonance<T> {
    pub omega_0: T,
    pub max_population: T,
    /// Photon number of the nearest `ω_q/(n+1)`.
    pub n: i32,
}

/// Sampling of the excited population inside a scan.
pub const SCAN_SAMPLES_PER_PERIOD: usize = 8;

/// Ground-state spectroscopy: the largest excited population within
/// `horizon` at each `ω₀`.
pub fn spectroscopy_scan<T: Real>(
    omega_q: T,
    lambda_x: T,
    longitudinal: Longitudinal<T>,
    omega_0_values: &[T],
    horizon: T,
) -> Result<Vec<ScanPoint<T>>> {
    omega_0_values
        .par_iter()
        .map(|&w0| {
            let lambda_z = match longitudinal {
                Longitudinal::Amplitude(l) => l,
                Longitudinal::Ratio(x) => x * w0 / lit(2.0),
            };
            let p = DriveParams { omega_q, lambda_x, lambda_z, omega_0: w0 };
            Ok(ScanPoint { control: w0, max_population: max_excited_population(&p, horizon, SCAN_SAMPLES_PER_PERIOD)? })
        })
        .collect()
}

/// Index of the `ω_q/(n+1)` closest to `omega_0`.
pub fn nearest_resonance<T: Real>(omega_q: T, omega_0: T) -> i32 {
    let r = to_f64(omega_q / omega_0);
    (r.round() as i32 - 1).max(0)
}

/// Strict local maxima over ±[`PEAK_WINDOW`] points above [`PEAK_THRESHOLD`].
pub fn resonances<T: Real>(omega_q: T, scan: &[ScanPoint<T>]) -> Vec<Resonance<T>> {
    let values: Vec<f64> = scan.iter().map(|s| to_f64(s.max_population)).collect();
    find_peaks(&values, PEAK_WINDOW, PEAK_THRESHOLD)
        .into_iter()
        .map(|i| Resonance {
            omega_0: scan[i].control,
            max_population: scan[i].max_population,
            n: nearest_resonance(omega_q, scan[i].control),
        })
        .collect()
}

/// Largest excited population versus `x = 2λ_z/ω₀` with the drive held on
/// the `n`-photon resonance `ω₀ = ω_q/(n+1)`.
pub fn transparency_scan<T: Real>(
    n: i32,
    omega_q: T,
    lambda_x: T,
    x_values: &[T],
    horizon: T,
) -> Result<Vec<ScanPoint<T>>> {
    if n < 0 {
        return Err(Error::InvalidParameter(format!("photon index {n} must be >= 0")));
    }
    let omega_0 = omega_q / from_i64::<T>(n as i64 + 1);
    x_values
        .par_iter()
        .map(|&x| {
            let p = DriveParams { omega_q, lambda_x, lambda_z: x * omega_0 / lit(2.0), omega_0 };
            Ok(ScanPoint { control: x, max_population: max_excited_population(&p, horizon, SCAN_SAMPLES_PER_PERIOD)? })
        })
        .collect()
}

/// Interior local minima of a transparency scan below [`PEAK_THRESHOLD`],
/// as `x` values.
pub fn transparency_minima<T: Real>(scan: &[ScanPoint<T>]) -> Vec<T> {
    let values: Vec<f64> = scan.iter().map(|s| to_f64(s.max_population)).collect();
    find_minima(&values, 1)
        .into_iter()
        .filter(|&i| values[i] < PEAK_THRESHOLD)
        .map(|i| scan[i].control)
        .collect()
}

/// Phase factor of a unit amplitude after free evolution under `ω_q/2·σ_z`.
pub fn free_phase<T: Real>(omega_q: T, t: T, excited: bool) -> Complex<T> {
    let th = omega_q * t / lit(2.0);
    cis(if excited { -th } else { th })
}
