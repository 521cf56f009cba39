//! A longitudinally driven qubit exchanging its excitation with a discrete
//! bath,
//!
//! `H(t) = (ω_q/2 + λ_z cos ω₀t) σ_z + Σ ω_i b_i†b_i + Σ (g_i σ₊ b_i + h.c.)`.
//!
//! With no transverse drive the excitation number is conserved, so the
//! state `|e, 0⟩` lives in the `(1 + M)`-dimensional sector spanned by
//! `|e, 0⟩` and `|g, 1_i⟩`. The bath only sees the qubit through
//! `g_i J_n(2λ_z/ω₀)` for modes near `ω_q + nω₀`; at zeros of `J_n` the
//! qubit stops decaying.

use std::f64::consts::LN_2;

use rayon::prelude::*;

use crate::drive::DriveParams;
use crate::error::{Error, Result};
use crate::numerics::{find_minima, integrate_with, HermitianOperator, IntegratorOptions, Schrodinger, Stats};
use crate::scalar::{cplx, czero, from_usize, lit, norm_sqr, to_f64, Complex, Real};

pub const DEFAULT_MODES: usize = 21;
/// Bath width as a fraction of `ω_q`.
pub const DEFAULT_WIDTH: f64 = 0.2;
/// Undriven half-life of the default bath, in drive periods.
pub const DEFAULT_HALF_LIFE_PERIODS: f64 = 50.0;
/// Decay metric horizon, in undriven half-lives.
pub const HORIZON_HALF_LIVES: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BathMode<T> {
    pub omega: T,
    pub g: Complex<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BathSpec<T> {
    pub modes: Vec<BathMode<T>>,
    pub center: T,
    pub width: T,
}

impl<T: Real> BathSpec<T> {
    /// `count` equally spaced modes spanning `center ± width/2`, all with
    /// the real coupling `g`.
    pub fn uniform(center: T, width: T, count: usize, g: T) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidParameter("bath needs at least one mode".into()));
        }
        let modes = (0..count)
            .map(|i| {
                let omega = if count == 1 {
                    center
                } else {
                    center - width / lit(2.0) + width * from_usize::<T>(i) / from_usize::<T>(count - 1)
                };
                BathMode { omega, g: cplx(g, T::zero()) }
            })
            .collect();
        let b = Self { modes, center, width };
        b.validate()?;
        Ok(b)
    }

    /// The default bath for the `n`-th sideband: [`DEFAULT_MODES`] modes over
    /// `DEFAULT_WIDTH·ω_q` around `ω_q + nω₀`, coupled so that the undriven
    /// qubit on a bath centred at `ω_q` would lose half its population in
    /// [`DEFAULT_HALF_LIFE_PERIODS`] drive periods.
    pub fn default_for(omega_q: T, omega_0: T, n: usize) -> Result<Self> {
        let width = lit::<T>(DEFAULT_WIDTH) * omega_q;
        let spacing = width / from_usize::<T>(DEFAULT_MODES - 1);
        let half_life = lit::<T>(DEFAULT_HALF_LIFE_PERIODS) * T::two_pi() / omega_0;
        let rate = lit::<T>(LN_2) / half_life;
        let g = (rate * spacing / T::two_pi()).sqrt();
        Self::uniform(omega_q + from_usize::<T>(n) * omega_0, width, DEFAULT_MODES, g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.modes.is_empty() {
            return Err(Error::InvalidParameter("bath needs at least one mode".into()));
        }
        for (i, m) in self.modes.iter().enumerate() {
            if !(m.omega > T::zero()) || !m.omega.is_finite() {
                return Err(Error::InvalidParameter(format!("mode {i} has frequency {}", m.omega)));
            }
            if !m.g.re.is_finite() || !m.g.im.is_finite() {
                return Err(Error::InvalidParameter(format!("mode {i} has a non-finite coupling")));
            }
        }
        Ok(())
    }

    /// Mean spacing between adjacent modes; zero for a single mode.
    pub fn spacing(&self) -> T {
        let m = self.modes.len();
        if m < 2 {
            return T::zero();
        }
        let (lo, hi) = self
            .modes
            .iter()
            .fold((self.modes[0].omega, self.modes[0].omega), |(lo, hi), b| (lo.min(b.omega), hi.max(b.omega)));
        (hi - lo) / from_usize(m - 1)
    }

    /// Golden-rule rate `2π ⟨|g|²⟩ / spacing` of the continuum the modes
    /// sample.
    pub fn golden_rule_rate(&self) -> T {
        let s = self.spacing();
        if s == T::zero() {
            return T::zero();
        }
        let mean = self.modes.iter().fold(T::zero(), |a, m| a + norm_sqr(m.g)) / from_usize(self.modes.len());
        T::two_pi() * mean / s
    }

    /// `ln 2 / Γ` of [`golden_rule_rate`](Self::golden_rule_rate).
    pub fn half_life(&self) -> T {
        lit::<T>(LN_2) / self.golden_rule_rate()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QubitBathModel<T> {
    pub drive: DriveParams<T>,
    pub bath: BathSpec<T>,
}

/// Checks that the drive is purely longitudinal and assembles the model.
pub fn build_qubit_bath_model<T: Real>(p: &DriveParams<T>, bath: &BathSpec<T>) -> Result<QubitBathModel<T>> {
    p.validate()?;
    bath.validate()?;
    if p.lambda_x != T::zero() {
        return Err(Error::SectorViolation { lambda_x: to_f64(p.lambda_x) });
    }
    Ok(QubitBathModel { drive: *p, bath: bath.clone() })
}

impl<T: Real> QubitBathModel<T> {
    /// `1 + M`.
    pub fn dimension(&self) -> usize {
        1 + self.bath.modes.len()
    }

    /// Same model with `x = 2λ_z/ω₀` set to `x`.
    pub fn with_bessel_argument(&self, x: T) -> Self {
        let mut m = self.clone();
        m.drive.lambda_z = x * m.drive.omega_0 / lit(2.0);
        m
    }

    /// The sector Hamiltonian at time `t`, `|e, 0⟩` first.
    pub fn hamiltonian_at(&self, t: T) -> Result<HermitianOperator<T>> {
        let p = &self.drive;
        let shift = p.omega_q / lit(2.0) + p.lambda_z * (p.omega_0 * t).cos();
        HermitianOperator::from_upper(self.dimension(), |i, j| match (i, j) {
            (0, 0) => cplx(shift, T::zero()),
            (0, j) => self.bath.modes[j - 1].g,
            (i, j) if i == j => cplx(self.bath.modes[i - 1].omega - shift, T::zero()),
            _ => czero(),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExcitationSectorState<T: Real> {
    /// Amplitude on `|e, 0⟩`.
    pub c_e: Complex<T>,
    /// Amplitudes on `|g, 1_i⟩`.
    pub c: Vec<Complex<T>>,
}

impl<T: Real> ExcitationSectorState<T> {
    pub fn excited(modes: usize) -> Self {
        Self { c_e: cplx(T::one(), T::zero()), c: vec![czero(); modes] }
    }

    pub fn norm_sqr(&self) -> T {
        self.c.iter().fold(norm_sqr(self.c_e), |a, z| a + norm_sqr(*z))
    }

    pub fn survival(&self) -> T {
        norm_sqr(self.c_e)
    }
}

/// The sector generator, optionally with `|g, 0⟩` appended as a last,
/// uncoupled component.
struct Sector<'a, T> {
    model: &'a QubitBathModel<T>,
    vacuum: bool,
}

impl<T: Real> Sector<'_, T> {
    fn qubit_phase(&self, t: T) -> T {
        let p = &self.model.drive;
        p.omega_q * t / lit(2.0) + p.lambda_z * (p.omega_0 * t).sin() / p.omega_0
    }
}

impl<T: Real> Schrodinger<T> for Sector<'_, T> {
    fn dim(&self) -> usize {
        self.model.dimension() + usize::from(self.vacuum)
    }

    fn frame_phases(&self, t: T, out: &mut [T]) {
        let q = self.qubit_phase(t);
        out[0] = q;
        for (o, m) in out[1..].iter_mut().zip(&self.model.bath.modes) {
            *o = m.omega * t - q;
        }
        if self.vacuum {
            out[self.model.dimension()] = -q;
        }
    }

    fn apply(&self, _t: T, psi: &[Complex<T>], out: &mut [Complex<T>]) {
        let modes = &self.model.bath.modes;
        let mut e = czero();
        for (i, m) in modes.iter().enumerate() {
            e += m.g * psi[i + 1];
            out[i + 1] = m.g.conj() * psi[0];
        }
        out[0] = e;
        if self.vacuum {
            out[modes.len() + 1] = czero();
        }
    }
}

/// Default options: local tolerance `1e-10`, at least 50 steps per drive
/// period.
pub fn bath_options<T: Real>(model: &QubitBathModel<T>) -> IntegratorOptions<T> {
    IntegratorOptions::with_tol(lit(1e-10)).max_step(model.drive.period() / lit(50.0))
}

#[derive(Clone, Debug)]
pub struct SurvivalTrace<T> {
    pub times: Vec<T>,
    pub survival: Vec<T>,
    /// `| Σ|c|² - 1 |` at the last grid time.
    pub final_norm_drift: f64,
    pub stats: Stats,
}

/// Survival `|c_e(t)|²` starting from `|e, 0⟩`.
pub fn evolve_open<T: Real>(model: &QubitBathModel<T>, t_grid: &[T]) -> Result<SurvivalTrace<T>> {
    let psi0 = ExcitationSectorState::excited(model.bath.modes.len());
    let mut times = Vec::with_capacity(t_grid.len());
    let mut survival = Vec::with_capacity(t_grid.len());
    let mut last = 0.0;
    let stats = evolve_open_from(model, &psi0, t_grid, |t, s| {
        times.push(t);
        survival.push(s.survival());
        last = (to_f64(s.norm_sqr()) - 1.0).abs();
    })?;
    Ok(SurvivalTrace { times, survival, final_norm_drift: last, stats })
}

/// Evolves an arbitrary sector state and reports it at every grid time.
pub fn evolve_open_from<T: Real>(
    model: &QubitBathModel<T>,
    s0: &ExcitationSectorState<T>,
    t_grid: &[T],
    mut observe: impl FnMut(T, &ExcitationSectorState<T>),
) -> Result<Stats> {
    if s0.c.len() != model.bath.modes.len() {
        return Err(Error::Consistency(format!(
            "state has {} bath amplitudes, bath has {} modes",
            s0.c.len(),
            model.bath.modes.len()
        )));
    }
    let n = to_f64(s0.norm_sqr());
    if (n - 1.0).abs() > 1e-9 {
        return Err(Error::Normalization { norm_sqr: n });
    }
    let mut psi0 = vec![s0.c_e];
    psi0.extend_from_slice(&s0.c);
    let sys = Sector { model, vacuum: false };
    integrate_with(&sys, &psi0, t_grid, &bath_options(model), |t, psi| {
        observe(t, &ExcitationSectorState { c_e: psi[0], c: psi[1..].to_vec() });
    })
}

/// `|ρ_eg(t)|` for the qubit started in `α|g⟩ + β|e⟩` with the bath empty.
pub fn coherence_trace<T: Real>(
    model: &QubitBathModel<T>,
    alpha: Complex<T>,
    beta: Complex<T>,
    t_grid: &[T],
) -> Result<Vec<T>> {
    let n = to_f64(norm_sqr(alpha) + norm_sqr(beta));
    if (n - 1.0).abs() > 1e-9 {
        return Err(Error::Normalization { norm_sqr: n });
    }
    let m = model.bath.modes.len();
    let mut psi0 = vec![czero(); m + 2];
    psi0[0] = beta;
    psi0[m + 1] = alpha;
    let sys = Sector { model, vacuum: true };
    let mut out = Vec::with_capacity(t_grid.len());
    integrate_with(&sys, &psi0, t_grid, &bath_options(model), |_, psi| {
        out.push(norm_sqr(psi[0] * psi[m + 1].conj()).sqrt());
    })?;
    Ok(out)
}

/// Time at which the undriven (`x = 0`) survival first drops to 1/2,
/// linearly interpolated on a grid of 200 points per golden-rule half-life.
pub fn baseline_half_life<T: Real>(model: &QubitBathModel<T>) -> Result<T> {
    let guess = model.bath.half_life();
    if !(guess > T::zero()) || !guess.is_finite() {
        return Err(Error::InvalidParameter("bath has no decay channel".into()));
    }
    let grid = crate::numerics::linspace(T::zero(), guess * lit(3.0), 601);
    let tr = evolve_open(&model.with_bessel_argument(T::zero()), &grid)?;
    let half = lit::<T>(0.5);
    let k = tr.survival.iter().position(|s| *s < half).ok_or_else(|| Error::Numeric {
        dimension: model.dimension(),
        reason: "survival never drops to 1/2 within three golden-rule half-lives".into(),
    })?;
    let (s0, s1) = (tr.survival[k - 1], tr.survival[k]);
    Ok(grid[k - 1] + (s0 - half) / (s0 - s1) * (grid[k] - grid[k - 1]))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayPoint<T> {
    pub x: T,
    pub survival: T,
    /// `1 - survival`.
    pub decay: T,
}

/// Survival at `horizon` for each `x = 2λ_z/ω₀`.
pub fn decay_rate_scan<T: Real>(model: &QubitBathModel<T>, x_values: &[T], horizon: T) -> Result<Vec<DecayPoint<T>>> {
    if !(horizon > T::zero()) {
        return Err(Error::InvalidParameter(format!("horizon {horizon} must be positive")));
    }
    x_values
        .par_iter()
        .map(|&x| {
            let m = model.with_bessel_argument(x);
            let tr = evolve_open(&m, &[T::zero(), horizon])?;
            let s = tr.survival[1];
            Ok(DecayPoint { x, survival: s, decay: T::one() - s })
        })
        .collect()
}

/// `x` values of the interior local minima of the decay metric.
pub fn decay_minima<T: Real>(scan: &[DecayPoint<T>]) -> Vec<T> {
    let d: Vec<f64> = scan.iter().map(|p| to_f64(p.decay)).collect();
    find_minima(&d, 1).into_iter().map(|i| scan[i].x).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::linspace;

    fn drive(lz: f64) -> DriveParams<f64> {
        DriveParams { omega_q: 1.0, lambda_x: 0.0, lambda_z: lz, omega_0: 10.0 }
    }

    #[test]
    fn transverse_drive_is_rejected() {
        let bath = BathSpec::uniform(1.0, 0.2, 5, 0.01).unwrap();
        let p = DriveParams { lambda_x: 0.1, ..drive(0.0) };
        assert!(matches!(build_qubit_bath_model(&p, &bath), Err(Error::SectorViolation { .. })));
    }

    #[test]
    fn bath_validation() {
        assert!(BathSpec::<f64>::uniform(1.0, 0.2, 0, 0.01).is_err());
        assert!(BathSpec::<f64>::uniform(0.05, 0.2, 5, 0.01).is_err());
        let b = BathSpec::<f64>::uniform(1.0, 0.2, 21, 0.01).unwrap();
        assert!((b.spacing() - 0.01).abs() < 1e-15);
        assert!((b.modes[10].omega - 1.0).abs() < 1e-15);
    }

    #[test]
    fn default_bath_half_life() {
        let b = BathSpec::<f64>::default_for(1.0, 10.0, 0).unwrap();
        let period = 2.0 * std::f64::consts::PI / 10.0;
        assert!((b.half_life() / period - DEFAULT_HALF_LIFE_PERIODS).abs() < 1e-9);
        let b1 = BathSpec::<f64>::default_for(1.0, 10.0, 1).unwrap();
        assert_eq!(b1.center, 11.0);
    }

    #[test]
    fn measured_half_life() {
        let b = BathSpec::<f64>::default_for(1.0, 10.0, 0).unwrap();
        let model = build_qubit_bath_model(&drive(2.0), &b).unwrap();
        let t = baseline_half_life(&model).unwrap();
        assert!((t / b.half_life() - 1.0).abs() < 0.2, "{t} vs {}", b.half_life());
        let s = evolve_open(&model.with_bessel_argument(0.0), &[0.0, t]).unwrap().survival[1];
        assert!((s - 0.5).abs() < 1e-3, "{s}");
        let dead = BathSpec::uniform(1.0, 0.2, 5, 0.0).unwrap();
        assert!(baseline_half_life(&build_qubit_bath_model(&drive(0.0), &dead).unwrap()).is_err());
    }

    #[test]
    fn single_mode_exchange() {
        let g = 0.05;
        let bath = BathSpec::uniform(1.0, 0.0, 1, g).unwrap();
        let model = build_qubit_bath_model(&drive(0.0), &bath).unwrap();
        let grid = linspace(0.0, 100.0, 101);
        let tr = evolve_open(&model, &grid).unwrap();
        for (t, s) in tr.times.iter().zip(&tr.survival) {
            assert!((s - (g * t).cos().powi(2)).abs() < 1e-9);
        }
    }

    #[test]
    fn hamiltonian_is_hermitian_with_drive_on_diagonal() {
        let bath = BathSpec::uniform(1.0, 0.2, 4, 0.02).unwrap();
        let model = build_qubit_bath_model(&drive(3.0), &bath).unwrap();
        let h = model.hamiltonian_at(0.0).unwrap();
        assert!((h.matrix()[(0, 0)].re - 3.5).abs() < 1e-15);
        assert!((h.matrix()[(1, 1)].re - (0.9 - 3.5)).abs() < 1e-15);
        assert_eq!(h.matrix()[(2, 0)], cplx(0.02, 0.0));
    }

    #[test]
    fn uncoupled_bath_keeps_excitation() {
        let bath = BathSpec::uniform(1.0, 0.2, 5, 0.0).unwrap();
        let model = build_qubit_bath_model(&drive(7.0), &bath).unwrap();
        let tr = evolve_open(&model, &linspace(0.0, 20.0, 11)).unwrap();
        assert!(tr.survival.iter().all(|s| (s - 1.0).abs() < 1e-12));
    }
}
