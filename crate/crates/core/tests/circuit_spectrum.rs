use fluxlab::circuit::{diagonalize, flux_sweep, parity_classification, Parity};
use fluxlab::{CircuitParams, Error};

fn circuit_at(f: f64) -> CircuitParams {
    CircuitParams::default().at_flux(f)
}

#[test]
fn selection_rules_at_optimal_point() {
    let r = diagonalize(&CircuitParams { n_levels: 5, ..circuit_at(0.5) }).unwrap();
    let i = &r.current_elements;
    for (a, b) in [(0, 0), (1, 1), (0, 2)] {
        assert!(i[(a, b)].norm() < 1e-8, "I_{a}{b} = {}", i[(a, b)]);
    }
    for (a, b) in [(0, 1), (1, 2)] {
        assert!(i[(a, b)].norm() > 1e-3, "I_{a}{b} = {}", i[(a, b)]);
    }
    let parity = r.parity.clone().unwrap();
    let mut opposite = false;
    for a in 0..5 {
        for b in 0..5 {
            if parity[a] == parity[b] {
                assert!(i[(a, b)].norm() < 1e-8);
            } else if i[(a, b)].norm() > 1e-3 {
                opposite = true;
            }
        }
    }
    assert!(opposite);
    for e in r.parity_expectations() {
        assert!(e.abs() > 0.99);
    }
}

#[test]
fn all_transitions_allowed_off_optimal_point() {
    let r = diagonalize(&CircuitParams { n_levels: 3, ..circuit_at(0.49) }).unwrap();
    for (a, b) in [(0, 0), (1, 1), (0, 1), (0, 2), (1, 2)] {
        assert!(r.current_elements[(a, b)].norm() > 1e-6);
    }
    assert!(matches!(parity_classification(&r), Err(Error::ParityUndefined { .. })));
}

#[test]
fn current_matrix_is_hermitian() {
    let r = diagonalize(&circuit_at(0.47)).unwrap();
    let i = &r.current_elements;
    assert!((i - i.adjoint()).norm() < 1e-10);
}

#[test]
fn converges_to_high_truncation_reference() {
    // N = 20 run of the same Hamiltonian
    let reference_half = [66.78287710486657, 67.18172097930135, 74.18490732776776];
    let reference_off = [61.96402765823666, 71.31726624748974, 72.74297622866916];
    let at = |f: f64, n: usize| diagonalize(&CircuitParams { n_levels: 3, truncation: n, ..circuit_at(f) }).unwrap();

    let (r14, r16) = (at(0.5, 14), at(0.5, 16));
    for k in 0..3 {
        assert!(((r16.energies[k] - r14.energies[k]) / r16.energies[k]).abs() < 1e-8);
        assert!(((r16.energies[k] - reference_half[k]) / reference_half[k]).abs() < 1e-10);
    }
    assert!(r14.energies[1] - r14.energies[0] > 0.3);

    let r16 = at(0.47, 16);
    for k in 0..3 {
        assert!(((r16.energies[k] - reference_off[k]) / reference_off[k]).abs() < 1e-8);
    }
}

#[test]
fn spectrum_and_diagonal_current_symmetry() {
    let deltas = [0.002, 0.005, 0.01];
    for d in deltas {
        let lo = diagonalize(&circuit_at(0.5 - d)).unwrap();
        let hi = diagonalize(&circuit_at(0.5 + d)).unwrap();
        for k in 0..5 {
            assert!((lo.energies[k] - hi.energies[k]).abs() < 1e-9);
            let (a, b) = (lo.current_elements[(k, k)].re, hi.current_elements[(k, k)].re);
            assert!((a + b).abs() < 1e-8, "level {k}: {a} vs {b}");
        }
        assert!((lo.current_elements[(0, 1)].norm() - hi.current_elements[(0, 1)].norm()).abs() < 1e-8);
    }
}

#[test]
fn legacy_operator_shares_pattern_but_not_amplitudes() {
    let half = diagonalize(&CircuitParams { n_levels: 3, ..circuit_at(0.5) }).unwrap();
    for a in 0..3 {
        for b in 0..3 {
            let loop_zero = half.current_elements[(a, b)].norm() < 1e-8;
            let legacy_zero = half.third_junction_elements[(a, b)].norm() < 1e-8;
            assert_eq!(loop_zero, legacy_zero, "({a}, {b})");
        }
        assert!(half.third_junction_elements[(a, a)].norm() < 1e-8);
    }
    let off = diagonalize(&CircuitParams { n_levels: 3, ..circuit_at(0.47) }).unwrap();
    let rel = |a: usize, b: usize| {
        let (x, y) = (off.current_elements[(a, b)].norm(), off.third_junction_elements[(a, b)].norm());
        (x - y).abs() / x.max(y)
    };
    assert!(rel(0, 1) > 1e-3 || rel(1, 2) > 1e-3 || rel(0, 2) > 1e-3);
}

#[test]
fn sweep_matches_pointwise_results() {
    let fs = [0.46, 0.48, 0.5, 0.52, 0.54];
    let sweep = flux_sweep(&circuit_at(0.5), &fs, 3).unwrap();
    assert_eq!(sweep.len(), 5);
    for (r, f) in sweep.iter().zip(fs) {
        let single = diagonalize(&CircuitParams { n_levels: 3, ..circuit_at(f) }).unwrap();
        for k in 0..3 {
            assert_eq!(r.energies[k], single.energies[k]);
            assert!((r.current_elements[(k, k)] - single.current_elements[(k, k)]).norm() < 1e-12);
        }
    }
    assert_eq!(sweep[2].parity.as_deref(), Some(&[Parity::Even, Parity::Odd, Parity::Even][..]));
}

#[test]
fn single_precision_spectrum() {
    let p = fluxlab::CircuitParamsF32 { truncation: 8, n_levels: 2, ..Default::default() };
    let r = diagonalize(&p).unwrap();
    assert!(r.current_elements[(0, 0)].norm() < 1e-3);
    assert!(r.current_elements[(0, 1)].norm() > 0.1);
}
