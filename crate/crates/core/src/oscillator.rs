//! The driven qubit coupled to a low-frequency LC oscillator,
//!
//! `H(t) = ω_q/2·σ_z + ω a†a + (g₁σ_x + g₂σ_z)(a + a†) + (λ_xσ_x + λ_zσ_z) cos ω₀t`,
//!
//! its dispersive limit, and the dressed-frame model
//!
//! `Ω_R/2·τ_z + ω a†a + (β₁ τ₊a + β₂ τ₊a² + h.c.)`
//!
//! in which `β₁` drives single-photon and `β₂` two-photon exchange between
//! the dressed qubit and the oscillator.
//!
//! States are stored qubit-major: index `q·cutoff + m` for qubit level `q`
//! (bare `|0⟩,|1⟩` or dressed ground/excited) and Fock level `m`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::SpectralResult;
use crate::drive::{floquet_dressing, sideband_amplitude, DriveParams, TwoLevelState};
use crate::error::{Error, Result};
use crate::numerics::{
    dominant_frequency, hermitian_eig, integrate_with, FrequencyEstimate, HermitianOperator, IntegratorOptions,
    Schrodinger, SpectralOptions, Stats,
};
use crate::scalar::{cplx, czero, from_usize, lit, norm_sqr, to_f64, Complex, Real};

/// Population allowed in the top two Fock levels.
pub const TAIL_LIMIT: f64 = 1e-6;
/// Largest `|g₁|/Δ` accepted by the dispersive transform.
pub const DISPERSIVE_LIMIT: f64 = 0.1;
/// Smallest peak-to-peak excursion of a signal counted as an oscillation.
pub const DETECTION_FLOOR: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OscillatorParams<T> {
    pub omega: T,
    /// Present when the couplings were derived from a circuit.
    pub inductance_l: Option<T>,
    pub mutual_m: Option<T>,
    /// Number of Fock levels kept, `|0⟩ … |cutoff-1⟩`.
    pub fock_cutoff: usize,
    pub g1: T,
    pub g2: T,
}

impl<T: Real> OscillatorParams<T> {
    pub fn new(omega: T, g1: T, g2: T, fock_cutoff: usize) -> Result<Self> {
        let o = Self { omega, inductance_l: None, mutual_m: None, fock_cutoff, g1, g2 };
        o.validate()?;
        Ok(o)
    }

    /// `g₁ = M√(ω/2L)·|I_01|`, `g₂ = M√(ω/2L)·(I_11 - I_00)/2`, with `ħ = 1`.
    pub fn from_circuit(spec: &SpectralResult<T>, omega: T, inductance_l: T, mutual_m: T, fock_cutoff: usize) -> Result<Self> {
        if spec.n_levels() < 2 {
            return Err(Error::Arity { needed: 2, got: spec.n_levels() });
        }
        if !(inductance_l > T::zero()) {
            return Err(Error::InvalidParameter(format!("inductance {inductance_l} must be positive")));
        }
        let scale = mutual_m * (omega / (lit::<T>(2.0) * inductance_l)).sqrt();
        let i = &spec.current_elements;
        let o = Self {
            omega,
            inductance_l: Some(inductance_l),
            mutual_m: Some(mutual_m),
            fock_cutoff,
            g1: scale * norm_sqr(i[(0, 1)]).sqrt(),
            g2: scale * (i[(1, 1)].re - i[(0, 0)].re) / lit(2.0),
        };
        o.validate()?;
        Ok(o)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > T::zero()) || !self.omega.is_finite() {
            return Err(Error::InvalidParameter(format!("oscillator frequency {} must be positive", self.omega)));
        }
        if self.fock_cutoff < 4 {
            return Err(Error::InvalidParameter(format!("Fock cutoff {} below 4", self.fock_cutoff)));
        }
        if !self.g1.is_finite() || !self.g2.is_finite() {
            return Err(Error::InvalidParameter("couplings must be finite".into()));
        }
        Ok(())
    }

    pub fn with_omega(mut self, omega: T) -> Self {
        self.omega = omega;
        self
    }
}

fn sqrt_n<T: Real>(m: usize) -> T {
    from_usize::<T>(m).sqrt()
}

/// `out[m] += c · ((a + a†) psi)[m]` on one qubit block.
fn add_position<T: Real>(c: T, psi: &[Complex<T>], out: &mut [Complex<T>]) {
    let n = psi.len();
    for m in 0..n {
        let mut z = czero();
        if m > 0 {
            z += psi[m - 1] * sqrt_n::<T>(m);
        }
        if m + 1 < n {
            z += psi[m + 1] * sqrt_n::<T>(m + 1);
        }
        out[m] += z * c;
    }
}

/// Matrix element `⟨m|(a + a†)^k|m'⟩` for `k = 1, 2`, as a dense builder.
fn position_power<T: Real>(cutoff: usize, k: u32) -> Vec<Vec<T>> {
    let mut x = vec![vec![T::zero(); cutoff]; cutoff];
    for m in 0..cutoff.saturating_sub(1) {
        x[m][m + 1] = sqrt_n(m + 1);
        x[m + 1][m] = sqrt_n(m + 1);
    }
    if k == 1 {
        return x;
    }
    let mut x2 = vec![vec![T::zero(); cutoff]; cutoff];
    for i in 0..cutoff {
        for j in 0..cutoff {
            x2[i][j] = (0..cutoff).fold(T::zero(), |a, l| a + x[i][l] * x[l][j]);
        }
    }
    x2
}

/// The undriven model `ω_q/2·σ_z + ω a†a + (g₁σ_x + g₂σ_z)(a + a†)`.
pub fn static_model<T: Real>(o: &OscillatorParams<T>, omega_q: T) -> Result<HermitianOperator<T>> {
    o.validate()?;
    let c = o.fock_cutoff;
    let x = position_power::<T>(c, 1);
    HermitianOperator::from_upper(2 * c, |i, j| {
        let (qi, mi) = (i / c, i % c);
        let (qj, mj) = (j / c, j % c);
        let sz = if qi == 0 { -T::one() } else { T::one() };
        let mut v = T::zero();
        if qi == qj {
            if mi == mj {
                v += sz * omega_q / lit(2.0) + o.omega * from_usize(mi);
            }
            v += o.g2 * sz * x[mi][mj];
        } else {
            v += o.g1 * x[mi][mj];
        }
        cplx(v, T::zero())
    })
}

/// Which second-order term the dispersive transform keeps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SecondOrder {
    /// `+(g₁²/Δ)(a + a†)` with `Δ = ω_q - ω`.
    #[default]
    PlusOverDetuning,
    /// `-(g₁²/ω_q)(a + a†)`.
    MinusOverQubit,
}

/// `ω_q/2·σ_z + ω a†a + σ_z[g₂ ± (g₁²/D)(a + a†)](a + a†)`.
pub fn dispersive_transform<T: Real>(o: &OscillatorParams<T>, omega_q: T) -> Result<HermitianOperator<T>> {
    dispersive_transform_with(o, omega_q, SecondOrder::default())
}

pub fn dispersive_transform_with<T: Real>(
    o: &OscillatorParams<T>,
    omega_q: T,
    form: SecondOrder,
) -> Result<HermitianOperator<T>> {
    o.validate()?;
    let delta = omega_q - o.omega;
    let ratio = to_f64(o.g1.abs() / delta.abs());
    if !(ratio < DISPERSIVE_LIMIT) {
        return Err(Error::DispersiveRegime { ratio, limit: DISPERSIVE_LIMIT });
    }
    let k = match form {
        SecondOrder::PlusOverDetuning => o.g1 * o.g1 / delta,
        SecondOrder::MinusOverQubit => -o.g1 * o.g1 / omega_q,
    };
    let c = o.fock_cutoff;
    let x = position_power::<T>(c, 1);
    let x2 = position_power::<T>(c, 2);
    HermitianOperator::from_upper(2 * c, |i, j| {
        let (qi, mi) = (i / c, i % c);
        let (qj, mj) = (j / c, j % c);
        if qi != qj {
            return czero();
        }
        let sz = if qi == 0 { -T::one() } else { T::one() };
        let mut v = sz * (o.g2 * x[mi][mj] + k * x2[mi][mj]);
        if mi == mj {
            v += sz * omega_q / lit(2.0) + o.omega * from_usize(mi);
        }
        cplx(v, T::zero())
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DispersiveComparison<T> {
    /// `(qubit level, photon number)` of each compared level.
    pub labels: Vec<(usize, usize)>,
    pub exact: Vec<T>,
    pub effective: Vec<T>,
    pub max_error: T,
    /// `5 (g₁/Δ)² ω`.
    pub tolerance: T,
}

/// Eigenvalue of the eigenvector with the largest weight on each bare
/// state `|q, m⟩`.
fn labelled_levels<T: Real>(h: &HermitianOperator<T>, labels: &[(usize, usize)], cutoff: usize) -> Result<Vec<T>> {
    let eig = hermitian_eig(h, h.dimension())?;
    Ok(labels
        .iter()
        .map(|&(q, m)| {
            let row = q * cutoff + m;
            let k = (0..eig.values.len())
                .max_by(|&i, &j| norm_sqr(eig.vectors[(row, i)]).partial_cmp(&norm_sqr(eig.vectors[(row, j)])).unwrap())
                .unwrap();
            eig.values[k]
        })
        .collect())
}

/// Compares the static model with its dispersive transform on the levels
/// with fewer than `photons` quanta in either qubit branch.
pub fn dispersive_comparison<T: Real>(
    o: &OscillatorParams<T>,
    omega_q: T,
    photons: usize,
    form: SecondOrder,
) -> Result<DispersiveComparison<T>> {
    if photons == 0 || photons + 2 > o.fock_cutoff {
        return Err(Error::Dimension { dimension: o.fock_cutoff, requested: photons + 2 });
    }
    let labels: Vec<(usize, usize)> = (0..2).flat_map(|q| (0..photons).map(move |m| (q, m))).collect();
    let exact = labelled_levels(&static_model(o, omega_q)?, &labels, o.fock_cutoff)?;
    let effective = labelled_levels(&dispersive_transform_with(o, omega_q, form)?, &labels, o.fock_cutoff)?;
    let max_error = exact.iter().zip(&effective).fold(T::zero(), |a, (x, y)| a.max((*x - *y).abs()));
    let r = o.g1 / (omega_q - o.omega);
    Ok(DispersiveComparison { labels, exact, effective, max_error, tolerance: lit::<T>(5.0) * r * r * o.omega })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveModel<T> {
    pub omega_r: T,
    pub beta1: T,
    pub beta2: T,
    pub n: i32,
    /// `ω_q - ω`.
    pub delta: T,
}

/// `Ω_R = √(Δ_n² + 4λ_n²)`, `β₁ = 2(λ_n/Ω_R)g₂`, `β₂ = 2λ_n g₁²/(Ω_R Δ)`.
pub fn effective_params<T: Real>(p: &DriveParams<T>, o: &OscillatorParams<T>, n: i32) -> Result<EffectiveModel<T>> {
    p.validate()?;
    o.validate()?;
    let lambda = sideband_amplitude(n, p)?;
    let dn = p.detuning(n);
    let two = lit::<T>(2.0);
    let omega_r = (dn * dn + two * two * lambda * lambda).sqrt();
    if omega_r <= lit::<T>(1e-12) * (p.omega_q.abs() + p.lambda_x.abs()) {
        return Err(Error::DegenerateDressing);
    }
    let delta = p.omega_q - o.omega;
    Ok(EffectiveModel {
        omega_r,
        beta1: two * lambda / omega_r * o.g2,
        beta2: two * lambda * o.g1 * o.g1 / (omega_r * delta),
        n,
        delta,
    })
}

#[derive(Clone, Debug)]
pub struct OscillatorTrace<T> {
    pub times: Vec<T>,
    /// Population of the upper qubit level (bare `|1⟩` or dressed excited).
    pub excited_population: Vec<T>,
    pub photon_number: Vec<T>,
    /// Population of the top two Fock levels.
    pub tail: Vec<T>,
    pub stats: Stats,
}

/// Signal a Rabi frequency is read from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Observable {
    ExcitedPopulation,
    PhotonNumber,
}

impl<T: Real> OscillatorTrace<T> {
    pub fn signal(&self, obs: Observable) -> &[T] {
        match obs {
            Observable::ExcitedPopulation => &self.excited_population,
            Observable::PhotonNumber => &self.photon_number,
        }
    }

    pub fn max_tail(&self) -> T {
        self.tail.iter().fold(T::zero(), |a, &b| a.max(b))
    }
}

struct Recorder<T: Real> {
    cutoff: usize,
    /// Qubit state whose population is recorded; bare `|1⟩` when `None`.
    upper: Option<TwoLevelState<T>>,
    trace: OscillatorTrace<T>,
}

impl<T: Real> Recorder<T> {
    fn new(cutoff: usize, points: usize) -> Self {
        let v = || Vec::with_capacity(points);
        Self {
            cutoff,
            upper: None,
            trace: OscillatorTrace {
                times: v(),
                excited_population: v(),
                photon_number: v(),
                tail: v(),
                stats: Stats::default(),
            },
        }
    }

    fn record(&mut self, t: T, psi: &[Complex<T>]) {
        let c = self.cutoff;
        let mut upper = T::zero();
        let mut photons = T::zero();
        let mut tail = T::zero();
        for (i, z) in psi.iter().enumerate() {
            let p = norm_sqr(*z);
            let m = i % c;
            match &self.upper {
                None if i >= c => upper += p,
                Some(e) if i < c => upper += norm_sqr(e.a.conj() * *z + e.b.conj() * psi[c + i]),
                _ => {}
            }
            photons += p * from_usize(m);
            if m + 2 >= c {
                tail += p;
            }
        }
        let tr = &mut self.trace;
        tr.times.push(t);
        tr.excited_population.push(upper);
        tr.photon_number.push(photons);
        tr.tail.push(tail);
    }

    fn finish(mut self, stats: Stats) -> Result<OscillatorTrace<T>> {
        self.trace.stats = stats;
        let tail = to_f64(self.trace.max_tail());
        if tail > TAIL_LIMIT {
            let n_max = self.trace.photon_number.iter().fold(0.0f64, |a, &b| a.max(to_f64(b)));
            let required = (n_max + 8.0 * (n_max + 1.0).sqrt()).ceil() as usize + 2;
            return Err(Error::CutoffLeak {
                cutoff: self.cutoff,
                required: required.max(self.cutoff + 2),
                tail_population: tail,
            });
        }
        Ok(self.trace)
    }
}

/// The full time-dependent qubit–oscillator model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FullModel<T> {
    pub drive: DriveParams<T>,
    pub oscillator: OscillatorParams<T>,
}

pub fn build_full_model<T: Real>(p: &DriveParams<T>, o: &OscillatorParams<T>) -> Result<FullModel<T>> {
    p.validate()?;
    o.validate()?;
    Ok(FullModel { drive: *p, oscillator: *o })
}

impl<T: Real> FullModel<T> {
    pub fn dimension(&self) -> usize {
        2 * self.oscillator.fock_cutoff
    }

    pub fn hamiltonian_at(&self, t: T) -> Result<HermitianOperator<T>> {
        let static_part = static_model(&self.oscillator, self.drive.omega_q)?;
        let p = &self.drive;
        let c = self.oscillator.fock_cutoff;
        let f = (p.omega_0 * t).cos();
        let m = static_part.matrix();
        HermitianOperator::from_upper(2 * c, |i, j| {
            let mut v = m[(i, j)];
            if i % c == j % c {
                if i == j {
                    v += cplx(if i < c { -p.lambda_z * f } else { p.lambda_z * f }, T::zero());
                } else {
                    v += cplx(p.lambda_x * f, T::zero());
                }
            }
            v
        })
    }

    /// Evolves `qubit ⊗ |m⟩` and checks the Fock tail on every sample.
    pub fn evolve(&self, qubit: &TwoLevelState<T>, fock: usize, t_grid: &[T]) -> Result<OscillatorTrace<T>> {
        self.evolve_projected(qubit, fock, t_grid, None)
    }

    /// As [`evolve`](Self::evolve), with the recorded qubit population taken
    /// on `upper` instead of bare `|1⟩`.
    pub fn evolve_projected(
        &self,
        qubit: &TwoLevelState<T>,
        fock: usize,
        t_grid: &[T],
        upper: Option<TwoLevelState<T>>,
    ) -> Result<OscillatorTrace<T>> {
        let c = self.oscillator.fock_cutoff;
        if fock >= c {
            return Err(Error::Dimension { dimension: c, requested: fock + 1 });
        }
        let q = TwoLevelState::new(qubit.a, qubit.b)?;
        let mut psi0 = vec![czero(); 2 * c];
        psi0[fock] = q.a;
        psi0[c + fock] = q.b;
        let opts = IntegratorOptions::with_tol(lit(1e-10)).max_step(self.drive.period() / lit(50.0));
        let mut rec = Recorder::new(c, t_grid.len());
        rec.upper = upper;
        let stats = integrate_with(&FullSystem { m: self }, &psi0, t_grid, &opts, |t, psi| rec.record(t, psi))?;
        rec.finish(stats)
    }
}

struct FullSystem<'a, T> {
    m: &'a FullModel<T>,
}

impl<T: Real> Schrodinger<T> for FullSystem<'_, T> {
    fn dim(&self) -> usize {
        self.m.dimension()
    }

    fn frame_phases(&self, t: T, out: &mut [T]) {
        let p = &self.m.drive;
        let c = self.m.oscillator.fock_cutoff;
        let th = p.omega_q * t / lit(2.0) + p.lambda_z * (p.omega_0 * t).sin() / p.omega_0;
        let w = self.m.oscillator.omega * t;
        for m in 0..c {
            let osc = w * from_usize(m);
            out[m] = osc - th;
            out[c + m] = osc + th;
        }
    }

    fn apply(&self, t: T, psi: &[Complex<T>], out: &mut [Complex<T>]) {
        let o = &self.m.oscillator;
        let c = o.fock_cutoff;
        let drive = self.m.drive.lambda_x * (self.m.drive.omega_0 * t).cos();
        let (p0, p1) = psi.split_at(c);
        let (o0, o1) = out.split_at_mut(c);
        for m in 0..c {
            o0[m] = p1[m] * drive;
            o1[m] = p0[m] * drive;
        }
        add_position(-o.g2, p0, o0);
        add_position(o.g2, p1, o1);
        add_position(o.g1, p1, o0);
        add_position(o.g1, p0, o1);
    }
}

/// Evolves `|dressed excited, m⟩` under the static dressed-frame model.
pub fn effective_evolve<T: Real>(
    em: &EffectiveModel<T>,
    omega: T,
    fock_cutoff: usize,
    initial_fock: usize,
    t_grid: &[T],
) -> Result<OscillatorTrace<T>> {
    let c = fock_cutoff;
    if c < 4 {
        return Err(Error::InvalidParameter(format!("Fock cutoff {c} below 4")));
    }
    if initial_fock >= c {
        return Err(Error::Dimension { dimension: c, requested: initial_fock + 1 });
    }
    let h = effective_hamiltonian(em, omega, c)?;
    let mut psi0 = vec![czero(); 2 * c];
    psi0[c + initial_fock] = cplx(T::one(), T::zero());
    let scale = em.omega_r.abs().max(omega).max(em.beta1.abs()).max(em.beta2.abs());
    let opts = IntegratorOptions::with_tol(lit(1e-10)).max_step(lit::<T>(0.05) / scale);
    let mut rec = Recorder::new(c, t_grid.len());
    let stats = integrate_with(&h, &psi0, t_grid, &opts, |t, psi| rec.record(t, psi))?;
    rec.finish(stats)
}

/// Dense dressed-frame Hamiltonian, row-major.
pub fn effective_hamiltonian<T: Real>(
    em: &EffectiveModel<T>,
    omega: T,
    cutoff: usize,
) -> Result<crate::numerics::ConstantHamiltonian<T>> {
    let h = HermitianOperator::from_upper(2 * cutoff, |i, j| {
        let (qi, mi) = (i / cutoff, i % cutoff);
        let (qj, mj) = (j / cutoff, j % cutoff);
        let mut v = T::zero();
        if i == j {
            v = if qi == 0 { -em.omega_r } else { em.omega_r } / lit(2.0) + omega * from_usize(mi);
        } else if qi == 0 && qj == 1 {
            // ⟨g, m| (τ₋a† β₁ + τ₋a†² β₂) |e, m'⟩
            if mi == mj + 1 {
                v = em.beta1 * sqrt_n::<T>(mi);
            } else if mi == mj + 2 {
                v = em.beta2 * (sqrt_n::<T>(mi) * sqrt_n::<T>(mi - 1));
            }
        } else if qi == 1 && qj == 0 {
            if mj == mi + 1 {
                v = em.beta1 * sqrt_n::<T>(mj);
            } else if mj == mi + 2 {
                v = em.beta2 * (sqrt_n::<T>(mj) * sqrt_n::<T>(mj - 1));
            }
        }
        cplx(v, T::zero())
    })?;
    let n = 2 * cutoff;
    Ok(crate::numerics::ConstantHamiltonian { dim: n, matrix: h.matrix().transpose().iter().copied().collect() })
}

/// Dominant angular frequency of a uniformly sampled trace observable.
///
/// Signals whose peak-to-peak excursion stays below [`DETECTION_FLOOR`]
/// report [`Error::NoOscillation`].
pub fn rabi_extract<T: Real>(trace: &OscillatorTrace<T>, observable: Observable) -> Result<FrequencyEstimate> {
    let s: Vec<f64> = trace.signal(observable).iter().map(|v| to_f64(*v)).collect();
    let t = &trace.times;
    if t.len() < 8 {
        return Err(Error::NoOscillation);
    }
    let dt = to_f64(t[1] - t[0]);
    dominant_frequency(&s, dt, &SpectralOptions { min_amplitude: DETECTION_FLOOR, ..Default::default() })
}

/// Resonance between the dressed qubit and the oscillator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tuning {
    /// `ω = Ω_R`.
    SinglePhoton,
    /// `2ω = Ω_R`.
    TwoPhoton,
}

impl Tuning {
    pub fn photons(self) -> usize {
        match self {
            Tuning::SinglePhoton => 1,
            Tuning::TwoPhoton => 2,
        }
    }
}

/// Knobs of a coexistence run beyond the drive and the couplings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSettings<T> {
    /// Sideband the drive sits on.
    pub n: i32,
    /// Oscillation periods of the predicted exchange to simulate.
    pub periods: T,
    pub samples_per_period: usize,
}

impl<T: Real> Default for RunSettings<T> {
    fn default() -> Self {
        Self { n: 0, periods: lit(4.0), samples_per_period: 64 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TuningOutcome {
    pub tuning: Tuning,
    /// Oscillator frequency used, tuned to the Floquet splitting.
    pub omega: f64,
    /// Floquet splitting of the driven qubit.
    pub floquet_splitting: f64,
    /// `2β₁` or `2√2 β₂`.
    pub predicted: f64,
    pub extracted: Option<f64>,
    pub uncertainty: Option<f64>,
    pub relative_error: Option<f64>,
    pub horizon: f64,
    pub max_tail: f64,
    pub max_norm_drift: f64,
}

impl TuningOutcome {
    pub fn oscillates(&self) -> bool {
        self.extracted.is_some()
    }
}

/// Runs the full model with the oscillator on the `tuning` resonance of the
/// Floquet-dressed qubit, starting from `|dressed excited, 0⟩`, and reads
/// the exchange frequency off the dressed excited population, sampled once
/// every few drive periods.
pub fn run_tuning<T: Real>(
    p: &DriveParams<T>,
    o: &OscillatorParams<T>,
    tuning: Tuning,
    settings: &RunSettings<T>,
    horizon: Option<T>,
) -> Result<TuningOutcome> {
    run_tuning_traced(p, o, tuning, settings, horizon).map(|(r, _)| r)
}

/// [`run_tuning`] that also returns the trace it analysed.
pub fn run_tuning_traced<T: Real>(
    p: &DriveParams<T>,
    o: &OscillatorParams<T>,
    tuning: Tuning,
    settings: &RunSettings<T>,
    horizon: Option<T>,
) -> Result<(TuningOutcome, OscillatorTrace<T>)> {
    let dressing = floquet_dressing(p, settings.n)?;
    let omega = dressing.splitting / from_usize(tuning.photons());
    let o = o.with_omega(omega);
    let em = effective_params(p, &o, settings.n)?;
    let predicted = match tuning {
        Tuning::SinglePhoton => lit::<T>(2.0) * em.beta1.abs(),
        Tuning::TwoPhoton => lit::<T>(2.0 * std::f64::consts::SQRT_2) * em.beta2.abs(),
    };
    let horizon = match horizon {
        Some(h) => h,
        None if predicted > T::zero() => settings.periods * T::two_pi() / predicted,
        None => {
            return Err(Error::InvalidParameter("no predicted oscillation to size the horizon; pass one".into()))
        }
    };
    // whole drive periods, so the Floquet states sampled are their t = 0 values
    let samples = ((to_f64(settings.periods) * settings.samples_per_period as f64).ceil() as usize).max(64);
    let stride = (to_f64(horizon / p.period()) / samples as f64).floor().max(1.0) as usize;
    let dt = p.period() * from_usize(stride);
    let steps = to_f64(horizon / dt).round() as usize;
    let grid: Vec<T> = (0..=steps).map(|k| dt * from_usize(k)).collect();
    let model = build_full_model(p, &o)?;
    let trace = model.evolve_projected(&dressing.states[1], 0, &grid, Some(dressing.states[1]))?;
    let found = match rabi_extract(&trace, Observable::ExcitedPopulation) {
        Ok(f) => Some(f),
        Err(Error::NoOscillation) => None,
        Err(e) => return Err(e),
    };
    let predicted = to_f64(predicted);
    let resolvable = predicted > 1e-12 * to_f64(p.omega_q);
    let outcome = TuningOutcome {
        tuning,
        omega: to_f64(omega),
        floquet_splitting: to_f64(dressing.splitting),
        predicted,
        extracted: found.map(|f| f.omega),
        uncertainty: found.map(|f| f.uncertainty),
        relative_error: found.filter(|_| resolvable).map(|f| (f.omega - predicted).abs() / predicted),
        horizon: to_f64(horizon),
        max_tail: to_f64(trace.max_tail()),
        max_norm_drift: trace.stats.max_norm_drift,
    };
    Ok((outcome, trace))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoexistenceReport {
    pub single_photon: TuningOutcome,
    pub two_photon: TuningOutcome,
    /// Both tunings with `g₂ = 0`.
    pub without_g2: [TuningOutcome; 2],
    /// Both tunings with `x` on the first zero of `J_n`.
    pub at_bessel_zero: [TuningOutcome; 2],
}

impl CoexistenceReport {
    /// Both processes seen, each within `tol` of its prediction.
    pub fn coexist(&self, tol: f64) -> bool {
        [&self.single_photon, &self.two_photon].iter().all(|t| t.relative_error.is_some_and(|e| e <= tol))
    }

    pub fn single_photon_killed_without_g2(&self) -> bool {
        !self.without_g2[0].oscillates()
    }

    pub fn killed_at_bessel_zero(&self) -> bool {
        self.at_bessel_zero.iter().all(|t| !t.oscillates())
    }
}

/// Drive with `x = 2λ_z/ω₀` on the first positive zero of `J_n`.
///
/// On resonance the leading-Bessel dressing would be degenerate there, so
/// the drive is detuned until `|Δ_n|` equals the dressed splitting the
/// original drive had.
pub fn bessel_zero_drive<T: Real>(p: &DriveParams<T>, n: i32) -> Result<DriveParams<T>> {
    let lambda = sideband_amplitude(n, p)?;
    let dn = p.detuning(n);
    let split = (dn * dn + lit::<T>(4.0) * lambda * lambda).sqrt();
    let x: T = crate::numerics::bessel_zero(n, 1)?;
    let omega_0 = (p.omega_q - split) / from_usize::<T>(n.unsigned_abs() as usize + 1);
    Ok(DriveParams { omega_0, lambda_z: x * omega_0 / lit(2.0), ..*p })
}

/// Runs both tunings and the two controls. The control runs reuse the
/// horizons of the main runs.
pub fn coexistence_experiment<T: Real>(
    p: &DriveParams<T>,
    o: &OscillatorParams<T>,
    settings: &RunSettings<T>,
) -> Result<CoexistenceReport> {
    let zero = bessel_zero_drive(p, settings.n)?;
    let no_g2 = OscillatorParams { g2: T::zero(), ..*o };
    let (single, two) = rayon::join(
        || run_tuning(p, o, Tuning::SinglePhoton, settings, None),
        || run_tuning(p, o, Tuning::TwoPhoton, settings, None),
    );
    let (single, two) = (single?, two?);
    let h1 = Some(lit::<T>(single.horizon));
    let h2 = Some(lit::<T>(two.horizon));
    let jobs = [
        (*p, no_g2, Tuning::SinglePhoton, h1),
        (*p, no_g2, Tuning::TwoPhoton, h2),
        (zero, *o, Tuning::SinglePhoton, h1),
        (zero, *o, Tuning::TwoPhoton, h2),
    ];
    let rest: Vec<TuningOutcome> =
        jobs.par_iter().map(|(d, osc, t, h)| run_tuning(d, osc, *t, settings, *h)).collect::<Result<_>>()?;
    let [a, b, c, d]: [TuningOutcome; 4] = rest.try_into().expect("four control runs");
    Ok(CoexistenceReport { single_photon: single, two_photon: two, without_g2: [a, b], at_bessel_zero: [c, d] })
}

/// Drive and oscillator couplings read off a circuit spectrum.
///
/// `phi_amplitude` sets `λ_x, λ_z` as in
/// [`qubit_params_from_spectrum`](crate::drive::qubit_params_from_spectrum),
/// and `g₁, g₂` follow [`OscillatorParams::from_circuit`] at `omega`. The
/// tunings of [`run_tuning`] move `ω` but keep these couplings.
#[allow(clippy::too_many_arguments)]
pub fn circuit_couplings<T: Real>(
    spec: &SpectralResult<T>,
    phi_amplitude: T,
    omega_0: T,
    omega: T,
    inductance_l: T,
    mutual_m: T,
    fock_cutoff: usize,
) -> Result<(DriveParams<T>, OscillatorParams<T>)> {
    let p = crate::drive::qubit_params_from_spectrum(spec, phi_amplitude, omega_0)?;
    let o = OscillatorParams::from_circuit(spec, omega, inductance_l, mutual_m, fock_cutoff)?;
    Ok((p, o))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::linspace;

    fn osc(omega: f64, g1: f64, g2: f64) -> OscillatorParams<f64> {
        OscillatorParams::new(omega, g1, g2, 12).unwrap()
    }

    #[test]
    fn decoupled_spectrum() {
        let o = osc(0.1, 0.0, 0.0);
        let e = hermitian_eig(&static_model(&o, 1.0).unwrap(), 6).unwrap().values;
        for (k, v) in e.iter().enumerate() {
            assert!((v - (-0.5 + 0.1 * k as f64)).abs() < 1e-12);
        }
    }

    #[test]
    fn vacuum_rabi_splitting() {
        let g1 = 0.01;
        let o = OscillatorParams::new(1.0, g1, 0.0, 12).unwrap();
        let e = hermitian_eig(&static_model(&o, 1.0).unwrap(), 3).unwrap().values;
        let split: f64 = e[2] - e[1];
        assert!((split - 2.0 * g1).abs() < 0.02 * 2.0 * g1, "{split}");
    }

    #[test]
    fn dispersive_transform_is_exact_without_g1() {
        let o = osc(0.05, 0.0, 0.004);
        let a = static_model(&o, 1.0).unwrap();
        let b = dispersive_transform(&o, 1.0).unwrap();
        assert_eq!(a.matrix(), b.matrix());
    }

    #[test]
    fn displaced_branches() {
        // σ_z-conditioned displacement ∓g₂/ω: energies shift by -g₂²/ω
        let o = osc(0.05, 0.0, 0.004);
        let o = OscillatorParams { fock_cutoff: 30, ..o };
        let e = hermitian_eig(&static_model(&o, 1.0).unwrap(), 1).unwrap().values[0];
        assert!((e - (-0.5 - 0.004 * 0.004 / 0.05)).abs() < 1e-12);
    }

    #[test]
    fn dispersive_regime_enforced() {
        let o = osc(0.5, 0.06, 0.0);
        assert!(matches!(dispersive_transform(&o, 1.0), Err(Error::DispersiveRegime { .. })));
    }

    #[test]
    fn effective_parameter_rules() {
        let p = DriveParams { omega_q: 1.0, lambda_x: 0.02, lambda_z: 0.5, omega_0: 1.0 };
        let em = effective_params(&p, &osc(0.02, 0.01, 0.0), 0).unwrap();
        assert_eq!(em.beta1, 0.0);
        assert!(em.beta2 != 0.0);
        let lam = sideband_amplitude(0, &p).unwrap();
        assert!((em.omega_r - 2.0 * lam.abs()).abs() < 1e-15);

        let z: f64 = crate::numerics::bessel_zero(0, 1).unwrap();
        let p0 = DriveParams { lambda_z: z / 2.0, omega_0: 0.97, ..p };
        let p0 = DriveParams { lambda_z: z * p0.omega_0 / 2.0, ..p0 };
        let em = effective_params(&p0, &osc(0.02, 0.01, 0.005), 0).unwrap();
        assert!(em.beta1.abs() < 1e-12 && em.beta2.abs() < 1e-12);

        let p1 = DriveParams { lambda_z: z / 2.0, ..p };
        assert!(matches!(effective_params(&p1, &osc(0.02, 0.01, 0.005), 0), Err(Error::DegenerateDressing)));
    }

    #[test]
    fn coupling_scaling() {
        let p = DriveParams { omega_q: 1.0, lambda_x: 0.02, lambda_z: 0.5, omega_0: 0.99 };
        let base = effective_params(&p, &osc(0.03, 0.01, 0.005), 0).unwrap();
        for s in [0.5, 2.0, 3.0] {
            let em = effective_params(&p, &osc(0.03, 0.01 * s, 0.005 * s), 0).unwrap();
            assert!((em.beta1 / base.beta1 - s).abs() < 1e-12);
            assert!((em.beta2 / base.beta2 - s * s).abs() < 1e-12);
        }
    }

    #[test]
    fn effective_single_photon_exchange() {
        let em = EffectiveModel { omega_r: 0.04, beta1: 0.002, beta2: 0.0, n: 0, delta: 0.96 };
        let period = std::f64::consts::PI / 0.002;
        let grid = linspace(0.0, 4.0 * period, 1025);
        let tr = effective_evolve(&em, 0.04, 8, 0, &grid).unwrap();
        let f = rabi_extract(&tr, Observable::ExcitedPopulation).unwrap();
        assert!((f.omega - 0.004).abs() < 0.01 * 0.004, "{}", f.omega);
        assert!(tr.stats.max_norm_drift < 1e-9);
    }

    #[test]
    fn effective_two_photon_exchange() {
        let em = EffectiveModel { omega_r: 0.04, beta1: 0.0, beta2: 0.001, n: 0, delta: 0.98 };
        let rate = 2.0 * std::f64::consts::SQRT_2 * 0.001;
        let grid = linspace(0.0, 4.0 * 2.0 * std::f64::consts::PI / rate, 1025);
        let tr = effective_evolve(&em, 0.02, 8, 0, &grid).unwrap();
        let f = rabi_extract(&tr, Observable::PhotonNumber).unwrap();
        assert!((f.omega - rate).abs() < 0.01 * rate, "{}", f.omega);
        let max_n = tr.photon_number.iter().fold(0.0f64, |a, &b| a.max(b));
        assert!((max_n - 2.0).abs() < 1e-6);
    }

    #[test]
    fn no_coupling_no_oscillation() {
        let em = EffectiveModel { omega_r: 0.04, beta1: 0.0, beta2: 0.0, n: 0, delta: 0.96 };
        let tr = effective_evolve(&em, 0.04, 6, 0, &linspace(0.0, 3000.0, 257)).unwrap();
        assert!(tr.excited_population.iter().all(|p: &f64| (p - 1.0).abs() < 1e-12));
        assert!(matches!(rabi_extract(&tr, Observable::ExcitedPopulation), Err(Error::NoOscillation)));
    }

    #[test]
    fn full_hamiltonian_hermitian() {
        let p = DriveParams { omega_q: 1.0, lambda_x: 0.02, lambda_z: 0.3, omega_0: 0.9 };
        let m = build_full_model(&p, &osc(0.03, 0.01, 0.005)).unwrap();
        for t in [0.0, 1.3, 7.7] {
            let h = m.hamiltonian_at(t).unwrap();
            assert_eq!(h.matrix(), &h.matrix().adjoint());
        }
    }

    #[test]
    fn full_model_matches_dense_hamiltonian() {
        // short evolution against the dense H(t) applied by a generic system
        struct Dense<'a>(&'a FullModel<f64>);
        impl Schrodinger<f64> for Dense<'_> {
            fn dim(&self) -> usize {
                self.0.dimension()
            }
            fn apply(&self, t: f64, psi: &[Complex<f64>], out: &mut [Complex<f64>]) {
                let h = self.0.hamiltonian_at(t).unwrap();
                let v = h.matrix() * nalgebra::DVector::from_column_slice(psi);
                out.copy_from_slice(v.as_slice());
            }
        }
        let p = DriveParams { omega_q: 1.0, lambda_x: 0.05, lambda_z: 0.3, omega_0: 0.9 };
        let m = build_full_model(&p, &OscillatorParams { fock_cutoff: 8, ..osc(0.2, 0.02, 0.01) }).unwrap();
        let grid = linspace(0.0, 20.0, 21);
        let fast = m.evolve(&TwoLevelState::excited(), 0, &grid).unwrap();
        let mut psi0 = vec![czero(); 16];
        psi0[8] = cplx(1.0, 0.0);
        let opts = IntegratorOptions::with_tol(1e-12).max_step(0.01);
        let mut k = 0;
        integrate_with(&Dense(&m), &psi0, &grid, &opts, |_, psi| {
            let pn: f64 = psi.iter().enumerate().map(|(i, z)| z.norm_sqr() * (i % 8) as f64).sum();
            assert!((pn - fast.photon_number[k]).abs() < 1e-8);
            k += 1;
        })
        .unwrap();
    }

    #[test]
    fn cutoff_leak_is_reported() {
        let p = DriveParams { omega_q: 1.0, lambda_x: 0.0, lambda_z: 0.0, omega_0: 1.0 };
        let o = OscillatorParams::new(0.05, 0.0, 0.2, 4).unwrap();
        let m = build_full_model(&p, &o).unwrap();
        let err = m.evolve(&TwoLevelState::excited(), 0, &linspace(0.0, 60.0, 31)).unwrap_err();
        assert!(matches!(err, Error::CutoffLeak { cutoff: 4, .. }), "{err}");
    }
}
