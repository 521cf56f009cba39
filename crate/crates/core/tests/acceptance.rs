//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Exits non-zero on a failed criterion only when `ACCEPTANCE_STRICT` is set,
//! so the remaining test targets of a workspace run still execute.

use std::f64::consts::PI;
use std::time::Instant;

use fluxlab::bath::{baseline_half_life, build_qubit_bath_model, decay_minima, decay_rate_scan, BathSpec};
use fluxlab::circuit::{build_hamiltonian, diagonalize};
use fluxlab::drive::*;
use fluxlab::numerics::{bessel_j_sequence, hermitian_eig, linspace, HermitianOperator};
use fluxlab::oscillator::{coexistence_experiment, dispersive_comparison, OscillatorParams, RunSettings, SecondOrder, TuningOutcome};
use fluxlab::{CircuitParams, Complex};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = (bool, String);

fn circuit_at(f: f64) -> CircuitParams {
    CircuitParams::default().at_flux(f)
}

fn selection_rules() -> Outcome {
    let half = diagonalize(&circuit_at(0.5)).unwrap();
    let off = diagonalize(&circuit_at(0.49)).unwrap();
    let (i, j) = (&half.current_elements, &off.current_elements);
    let forbidden = [(0, 0), (1, 1), (0, 2)].map(|(a, b)| i[(a, b)].norm()).into_iter().fold(0.0, f64::max);
    let allowed = [(0, 1), (1, 2)].map(|(a, b)| i[(a, b)].norm()).into_iter().fold(f64::INFINITY, f64::min);
    let broken = [(0, 0), (1, 1), (0, 2), (0, 1), (1, 2)].map(|(a, b)| j[(a, b)].norm()).into_iter().fold(f64::INFINITY, f64::min);
    (
        forbidden < 1e-8 && allowed > 1e-3 && broken > 1e-6,
        format!("f=0.5 max forbidden {forbidden:.2e}, min allowed {allowed:.3e}; f=0.49 min {broken:.3e}"),
    )
}

fn symmetry() -> Outcome {
    let (mut de, mut di) = (0.0f64, 0.0f64);
    for d in [0.002, 0.005, 0.01] {
        let lo = diagonalize(&circuit_at(0.5 - d)).unwrap();
        let hi = diagonalize(&circuit_at(0.5 + d)).unwrap();
        for k in 0..lo.n_levels() {
            de = de.max((lo.energies[k] - hi.energies[k]).abs());
            di = di.max((lo.current_elements[(k, k)].re + hi.current_elements[(k, k)].re).abs());
        }
    }
    (de < 1e-9 && di < 1e-8, format!("max |dE| {de:.2e} E_c, max |I(f)+I(1-f)| {di:.2e} I0"))
}

fn legacy_operator() -> Outcome {
    let lowest = |f: f64| diagonalize(&CircuitParams { n_levels: 3, ..circuit_at(f) }).unwrap();
    let half = lowest(0.5);
    let n = half.n_levels();
    let mut same = true;
    for a in 0..n {
        for b in 0..n {
            same &= (half.current_elements[(a, b)].norm() < 1e-8) == (half.third_junction_elements[(a, b)].norm() < 1e-8);
        }
    }
    let off = lowest(0.47);
    let mut rel = 0.0f64;
    for a in 0..n {
        for b in a + 1..n {
            let (x, y) = (off.current_elements[(a, b)].norm(), off.third_junction_elements[(a, b)].norm());
            rel = rel.max((x - y).abs() / x.max(y));
        }
    }
    (same && rel > 1e-3, format!("lowest 3 levels, pattern identical at f=0.5: {same}; largest relative difference at f=0.47 {rel:.3}"))
}

fn spectroscopy() -> Outcome {
    let (wq, lx, x) = (1.0, 0.02, 1.5);
    let grid = linspace(0.30, 1.05, 938);
    let step = grid[1] - grid[0];
    let horizon = 800.0;
    let scan = spectroscopy_scan(wq, lx, Longitudinal::Ratio(x), &grid, horizon).unwrap();
    let peaks = resonances(wq, &scan);
    let mut ok = true;
    let mut notes = Vec::new();
    for n in 0..3 {
        let target = wq / (n + 1) as f64;
        let p = DriveParams { omega_q: wq, lambda_x: lx, lambda_z: x * target / 2.0, omega_0: target };
        let tol = 2.0 * sideband_amplitude(n, &p).unwrap().abs() + 3.0 * step;
        match peaks.iter().filter(|r| r.n == n).min_by(|a, b| (a.omega_0 - target).abs().total_cmp(&(b.omega_0 - target).abs())) {
            Some(r) => {
                let off = (r.omega_0 - target).abs();
                ok &= off <= tol && r.max_population > 0.9;
                notes.push(format!("n={n} at {:.4} (off {off:.1e}, tol {tol:.1e}) P={:.3}", r.omega_0, r.max_population));
            }
            None => {
                ok = false;
                notes.push(format!("n={n} missing"));
            }
        }
    }
    let bare = resonances(wq, &spectroscopy_scan(wq, lx, Longitudinal::Amplitude(0.0), &grid, horizon).unwrap());
    let single = bare.len() == 1 && bare[0].n == 0;
    ok &= single;
    notes.push(format!("lambda_z=0 peaks n={:?}", bare.iter().map(|r| r.n).collect::<Vec<_>>()));
    (ok, notes.join("; "))
}

fn rwa_fidelity() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for n in [0, 1] {
        let w0 = 1.0 / (n + 1) as f64;
        let x = 1.0;
        let p = DriveParams { omega_q: 1.0, lambda_x: 0.02 * w0, lambda_z: x * w0 / 2.0, omega_0: w0 };
        let lambda = sideband_amplitude(n, &p).unwrap().abs();
        let grid = linspace(0.0, 3.0 * PI / lambda, 600);
        let tr = evolve_exact(&p, &TwoLevelState::ground(), &grid).unwrap();
        let dev = tr
            .times
            .iter()
            .zip(&tr.states)
            .map(|(t, s)| {
                let r = rwa_amplitudes(&p, n, Complex::new(1.0, 0.0), Complex::new(0.0, 0.0), *t).unwrap();
                (s.excited_population() - r.excited_population()).abs()
            })
            .fold(0.0, f64::max);
        ok &= dev < 0.02;
        notes.push(format!("n={n} x={x} max deviation {dev:.3}"));
    }
    (ok, notes.join("; "))
}

fn transparency() -> Outcome {
    let lx = 0.02;
    let horizon = 20.0 * PI / lx;
    let mut ok = true;
    let mut notes = Vec::new();
    for n in [0, 1] {
        let z: f64 = bessel_zero(n, 1).unwrap();
        let p = transparency_scan(n, 1.0, lx, &[z], horizon).unwrap()[0].max_population;
        ok &= p < 0.02;
        notes.push(format!("n={n} x={z:.4} max P {p:.3}"));
    }
    let open = transparency_scan(0, 1.0, lx, &[0.0], horizon).unwrap()[0].max_population;
    ok &= open > 0.98;
    notes.push(format!("x=0 max P {open:.4}"));
    (ok, notes.join("; "))
}

fn zeno() -> Outcome {
    let bath = BathSpec::default_for(1.0, 10.0, 0).unwrap();
    let p = DriveParams { omega_q: 1.0, lambda_x: 0.0, lambda_z: 0.0, omega_0: 10.0 };
    let model = build_qubit_bath_model(&p, &bath).unwrap();
    let half = baseline_half_life(&model).unwrap();
    let horizon = 5.0 * half;

    let grid = linspace(0.0, 6.5, 66);
    let step = grid[1] - grid[0];
    let scan = decay_rate_scan(&model, &grid, horizon).unwrap();
    let frozen = decay_rate_scan(&model, &[2.4048], horizon).unwrap()[0].survival;
    let baseline = scan[0].survival;
    let minima = decay_minima(&scan);
    let tracked = (1..=2).all(|k| {
        let z: f64 = bessel_zero(0, k).unwrap();
        minima.iter().any(|m| (m - z).abs() <= step + 1e-12)
    });
    (
        frozen > 0.95 && baseline < 0.5 && tracked,
        format!("half-life {half:.2}, survival x=2.4048 {frozen:.4}, x=0 {baseline:.4}, minima {minima:.2?}"),
    )
}

fn describe(t: &TuningOutcome) -> String {
    match (t.extracted, t.relative_error) {
        (Some(f), Some(e)) => format!("{f:.3e} vs {:.3e} ({:.1}%)", t.predicted, 100.0 * e),
        (Some(f), None) => format!("{f:.3e}, predicted {:.1e}", t.predicted),
        _ => "no oscillation".to_string(),
    }
}

fn coexistence() -> Outcome {
    let p = DriveParams { omega_q: 1.0, lambda_x: 0.02, lambda_z: 0.25, omega_0: 1.0 };
    let o = OscillatorParams::new(0.02, 0.01, 0.005, 16).unwrap();
    let settings = RunSettings { n: 0, periods: 3.0, samples_per_period: 64 };
    let r = coexistence_experiment(&p, &o, &settings).unwrap();
    let ok = r.coexist(0.1) && r.single_photon_killed_without_g2() && r.killed_at_bessel_zero();
    (
        ok,
        format!(
            "single {}; two {}; g2=0 single {}; g2=0 two {}; J zero single {}; J zero two {}",
            describe(&r.single_photon),
            describe(&r.two_photon),
            describe(&r.without_g2[0]),
            describe(&r.without_g2[1]),
            describe(&r.at_bessel_zero[0]),
            describe(&r.at_bessel_zero[1]),
        ),
    )
}

fn dispersive() -> Outcome {
    let o = OscillatorParams::new(0.1, 0.045, 0.005, 40).unwrap();
    let c = dispersive_comparison(&o, 1.0, 2, SecondOrder::PlusOverDetuning).unwrap();
    (c.max_error < c.tolerance, format!("g1/D=0.05, max error {:.2e}, tolerance {:.2e}", c.max_error, c.tolerance))
}

fn residual(h: &HermitianOperator<f64>, k: usize) -> f64 {
    let e = hermitian_eig(h, k).unwrap();
    let m = h.matrix();
    (0..k)
        .map(|j| {
            let v = e.vectors.column(j);
            (m * v - v * Complex::new(e.values[j], 0.0)).norm()
        })
        .fold(0.0, f64::max)
        / h.norm()
}

fn numerics() -> Outcome {
    let (mut rec, mut sum) = (0.0f64, 0.0f64);
    for i in 1..=600 {
        let x = i as f64 * 0.1;
        let j = bessel_j_sequence(60, x).unwrap();
        for n in 1..60 {
            rec = rec.max((j[n - 1] + j[n + 1] - 2.0 * n as f64 / x * j[n]).abs());
        }
        if x <= 30.0 {
            let even: f64 = j.iter().step_by(2).skip(1).sum();
            sum = sum.max((j[0] + 2.0 * even - 1.0).abs());
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let a = DMatrix::from_fn(80, 80, |_, _| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let random = HermitianOperator::new((&a + a.adjoint()) * Complex::new(0.5, 0.0)).unwrap();
    let circuit = build_hamiltonian(&circuit_at(0.47)).unwrap();
    let eig = residual(&random, 80).max(residual(&circuit, 5));

    let p = DriveParams { omega_q: 1.0, lambda_x: 0.02, lambda_z: 0.5, omega_0: 1.0 };
    let tr = evolve_exact(&p, &TwoLevelState::ground(), &linspace(0.0, 1e4 * p.period(), 1001)).unwrap();
    let drift = tr.stats.max_norm_drift;
    (
        rec < 1e-11 && sum < 1e-11 && eig < 1e-10 && drift < 1e-9,
        format!("recurrence {rec:.1e}, sum rule {sum:.1e}, eigen {eig:.1e}, norm drift {drift:.1e}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("selection rules", selection_rules),
        ("sweep symmetry", symmetry),
        ("legacy operator", legacy_operator),
        ("multi-photon spectroscopy", spectroscopy),
        ("RWA fidelity", rwa_fidelity),
        ("transparency", transparency),
        ("Zeno freezing", zeno),
        ("coexistence and disappearance", coexistence),
        ("dispersive transform", dispersive),
        ("numerics kernels", numerics),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = run();
        failed += usize::from(!ok);
        println!("{} {:>2} {name}: {detail} [{:.1} s]", if ok { "PASS" } else { "FAIL" }, k + 1, start.elapsed().as_secs_f64());
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 && std::env::var_os("ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
