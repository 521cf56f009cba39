use fluxlab::bath::*;
use fluxlab::drive::{bessel_zero, DriveParams};
use fluxlab::numerics::linspace;
use fluxlab::Complex;

fn longitudinal(lz: f64) -> DriveParams<f64> {
    DriveParams { omega_q: 1.0, lambda_x: 0.0, lambda_z: lz, omega_0: 10.0 }
}

fn model(n: usize) -> QubitBathModel<f64> {
    let bath = BathSpec::default_for(1.0, 10.0, n).unwrap();
    build_qubit_bath_model(&longitudinal(0.0), &bath).unwrap()
}

fn horizon(m: &QubitBathModel<f64>) -> f64 {
    HORIZON_HALF_LIVES * m.bath.half_life()
}

#[test]
fn undriven_qubit_decays_into_dense_bath() {
    let m = model(0);
    let half = m.bath.half_life();
    let tr = evolve_open(&m, &linspace(0.0, 2.0 * half, 41)).unwrap();
    assert!(tr.survival.windows(2).all(|w| w[1] < w[0]));
    assert!(*tr.survival.last().unwrap() < 0.5);
    // golden rule, up to finite-band corrections
    let s_half = tr.survival[20];
    assert!((s_half - 0.5).abs() < 0.1, "{s_half}");
    assert!(tr.final_norm_drift < 1e-9);
    assert!(tr.stats.max_norm_drift < 1e-9);
}

#[test]
fn zeno_freezing_at_first_zero() {
    let m = model(0);
    let t = horizon(&m);
    let z: f64 = bessel_zero(0, 1).unwrap();
    let baseline = evolve_open(&m, &[0.0, t]).unwrap().survival[1];
    let frozen = evolve_open(&m.with_bessel_argument(z), &[0.0, t]).unwrap().survival[1];
    assert!(baseline < 0.5, "{baseline}");
    assert!(frozen > 0.95, "{frozen}");
}

#[test]
fn coherence_survives_at_zero() {
    let m = model(0).with_bessel_argument(bessel_zero(0, 1).unwrap());
    let a = Complex::new(0.6, 0.0);
    let b = Complex::new(0.0, 0.8);
    let c = coherence_trace(&m, a, b, &linspace(0.0, horizon(&m), 11)).unwrap();
    assert!((c[0] - 0.48).abs() < 1e-15);
    for v in &c {
        assert!((v - 0.48).abs() < 0.05 * 0.48, "{v}");
    }
    let decaying = coherence_trace(&model(0), a, b, &[0.0, horizon(&m)]).unwrap();
    assert!(decaying[1] < 0.5 * 0.48);
}

#[test]
fn decay_minima_follow_bessel_zeros() {
    let m = model(0);
    let t = horizon(&m);
    let xs = [2.2, 2.4, 2.6, 5.3, 5.5, 5.7];
    let scan = decay_rate_scan(&m, &xs, t).unwrap();
    assert!(scan[1].decay < scan[0].decay && scan[1].decay < scan[2].decay);
    assert!(scan[4].decay < scan[3].decay && scan[4].decay < scan[5].decay);
    let at_zero = decay_rate_scan(&m, &[0.0], t).unwrap()[0].decay;
    assert!(scan[1].decay < at_zero / 20.0);
}

#[test]
fn shifted_bath_selects_first_sideband() {
    let m = model(1);
    let t = horizon(&m);
    let z: f64 = bessel_zero(1, 1).unwrap();
    let xs = [z - 0.3, z, z + 0.3];
    let scan = decay_rate_scan(&m, &xs, t).unwrap();
    assert_eq!(decay_minima(&scan), vec![z]);
    assert!(scan[1].survival > 0.95);
}

#[test]
fn free_evolution_limit() {
    let bath = BathSpec::uniform(1.0, 0.2, 21, 0.0).unwrap();
    for lz in [0.0, 3.0, 12.0] {
        let m = build_qubit_bath_model(&longitudinal(lz), &bath).unwrap();
        let tr = evolve_open(&m, &linspace(0.0, 30.0, 7)).unwrap();
        assert!(tr.survival.iter().all(|s| (s - 1.0).abs() < 1e-12));
    }
}

#[test]
fn sector_hamiltonian_is_hermitian() {
    let m = model(0).with_bessel_argument(1.3);
    for t in [0.0, 0.37, 5.0] {
        let h = m.hamiltonian_at(t).unwrap();
        let a = h.matrix();
        assert_eq!(a, &a.adjoint());
    }
}

#[test]
fn rejects_mismatched_state() {
    let m = model(0);
    let s = ExcitationSectorState::excited(3);
    assert!(evolve_open_from(&m, &s, &[0.0, 1.0], |_, _| {}).is_err());
}
