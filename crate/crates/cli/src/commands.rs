use anyhow::{anyhow, bail, Context};
use fluxlab::bath::{baseline_half_life, build_qubit_bath_model, decay_minima, decay_rate_scan, BathSpec, HORIZON_HALF_LIVES};
use fluxlab::circuit::{diagonalize, flux_sweep, SpectralResult};
use fluxlab::drive::{bessel_zero, nearest_resonance, qubit_params_from_spectrum, resonances, spectroscopy_scan, transparency_minima, transparency_scan};
use fluxlab::oscillator::{coexistence_experiment, dispersive_comparison, run_tuning_traced, OscillatorParams, RunSettings};
use fluxlab::{Complex, DriveParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::RunConfig;
use crate::output::{num, Artifacts};

fn sweep(cfg: &RunConfig) -> anyhow::Result<(Vec<f64>, Vec<SpectralResult<f64>>)> {
    let c = cfg.circuit()?;
    let grid = c.flux.as_ref().ok_or_else(|| anyhow!("circuit.flux grid is required"))?.values("circuit.flux")?;
    let results = flux_sweep(&c.params(grid[0]), &grid, c.n_levels)?;
    Ok((grid, results))
}

/// One row per flux point and operator: energies, then every `I_ij` with
/// `i <= j` as real and imaginary parts.
fn sweep_table(cfg: &RunConfig, out: &mut Artifacts, name: &str, legacy: bool) -> anyhow::Result<()> {
    let (grid, results) = sweep(cfg)?;
    let n = results.first().map_or(0, |r| r.n_levels());
    let mut header = vec!["f".to_string(), "operator".to_string()];
    header.extend((0..n).map(|k| format!("E{k}")));
    for i in 0..n {
        for j in i..n {
            header.push(format!("I{i}_{j}_re"));
            header.push(format!("I{i}_{j}_im"));
        }
    }
    let mut rows = Vec::new();
    for (f, r) in grid.iter().zip(&results) {
        let ops = [("loop", &r.current_elements), ("third-junction", &r.third_junction_elements)];
        for (tag, m) in &ops[..if legacy { 2 } else { 1 }] {
            let mut row = vec![num(*f), tag.to_string()];
            row.extend(r.energies.iter().map(|e| num(*e)));
            for i in 0..n {
                for j in i..n {
                    let z: Complex<f64> = m[(i, j)];
                    row.push(num(z.re));
                    row.push(num(z.im));
                }
            }
            rows.push(row);
        }
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    out.csv(name, &header, rows)
}

pub fn spectrum(cfg: &RunConfig, out: &mut Artifacts) -> anyhow::Result<()> {
    sweep_table(cfg, out, "spectrum.csv", false)
}

pub fn matrix_elements(cfg: &RunConfig, out: &mut Artifacts) -> anyhow::Result<()> {
    sweep_table(cfg, out, "matrix_elements.csv", true)
}

pub fn spectroscopy(cfg: &RunConfig, out: &mut Artifacts) -> anyhow::Result<()> {
    let d = cfg.drive()?;
    let grid = d.omega_0_grid.as_ref().ok_or_else(|| anyhow!("drive.omega_0_grid is required"))?.values("drive.omega_0_grid")?;
    let omega_q = d.omega_q()?;
    let scan = spectroscopy_scan(omega_q, d.lambda_x()?, d.longitudinal()?, &grid, d.horizon()?)?;
    out.csv(
        "spectroscopy.csv",
        &["omega_0", "max_population", "n"],
        scan.iter().map(|s| vec![num(s.control), num(s.max_population), nearest_resonance(omega_q, s.control).to_string()]),
    )?;
    out.csv(
        "resonances.csv",
        &["omega_0", "max_population", "n"],
        resonances(omega_q, &scan).iter().map(|r| vec![num(r.omega_0), num(r.max_population), r.n.to_string()]),
    )
}

pub fn transparency(cfg: &RunConfig, out: &mut Artifacts) -> anyhow::Result<()> {
    let d = cfg.drive()?;
    let grid = d.x_grid.as_ref().ok_or_else(|| anyhow!("drive.x_grid is required"))?.values("drive.x_grid")?;
    let scan = transparency_scan(d.n, d.omega_q()?, d.lambda_x()?, &grid, d.horizon()?)?;
    out.csv(
        "transparency.csv",
        &["x", "max_population", "n"],
        scan.iter().map(|s| vec![num(s.control), num(s.max_population), d.n.to_string()]),
    )?;
    out.csv("minima.csv", &["x"], transparency_minima(&scan).into_iter().map(|x| vec![num(x)]))
}

pub fn zeno(cfg: &RunConfig, out: &mut Artifacts) -> anyhow::Result<()> {
    let d = cfg.drive()?;
    let b = cfg.bath()?;
    if d.n < 0 {
        bail!("drive.n must be >= 0");
    }
    let grid = d.x_grid.as_ref().ok_or_else(|| anyhow!("drive.x_grid is required"))?.values("drive.x_grid")?;
    let omega_q = d.omega_q()?;
    let omega_0 = d.omega_0.ok_or_else(|| anyhow!("drive.omega_0 is required"))?;
    if b.modes < 2 {
        bail!("bath.modes must be >= 2");
    }
    let width = b.width * omega_q;
    let rate = std::f64::consts::LN_2 / (b.half_life_periods * std::f64::consts::TAU / omega_0);
    let g = (rate * width / (b.modes - 1) as f64 / std::f64::consts::TAU).sqrt();
    let mut bath = BathSpec::uniform(omega_q + d.n as f64 * omega_0, width, b.modes, g)?;
    if b.random_phases {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        for m in &mut bath.modes {
            m.g *= Complex::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
        }
    }
    let p = DriveParams { omega_q, lambda_x: 0.0, lambda_z: 0.0, omega_0 };
    let model = build_qubit_bath_model(&p, &bath)?;
    let half_life = baseline_half_life(&model)?;
    let horizon = d.horizon.unwrap_or(HORIZON_HALF_LIVES * half_life);
    let scan = decay_rate_scan(&model, &grid, horizon)?;
    let zeros: Vec<f64> = (1..=20).map_while(|k| bessel_zero(d.n, k).ok()).collect();
    let nearest = |x: f64| zeros.iter().copied().min_by(|a, b| (a - x).abs().total_cmp(&(b - x).abs())).unwrap_or(f64::NAN);
    out.csv(
        "zeno.csv",
        &["x", "survival", "decay", "nearest_bessel_zero", "n"],
        scan.iter().map(|s| vec![num(s.x), num(s.survival), num(s.decay), num(nearest(s.x)), d.n.to_string()]),
    )?;
    out.csv("minima.csv", &["x"], decay_minima(&scan).into_iter().map(|x| vec![num(x)]))?;
    out.json("bath.json", &json!({ "horizon": horizon, "half_life": half_life, "golden_rule_half_life": bath.half_life(), "modes": bath.modes.iter().map(|m| json!({"omega": m.omega, "g_re": m.g.re, "g_im": m.g.im})).collect::<Vec<_>>() }))
}

/// Drive and oscillator, either given directly or read off the circuit at
/// `circuit.f`.
fn drive_and_oscillator(cfg: &RunConfig) -> anyhow::Result<(DriveParams, OscillatorParams<f64>)> {
    let d = cfg.drive()?;
    let o = cfg.oscillator()?;
    let spec = match (&cfg.circuit, d.phi_amplitude.is_some() || o.g1.is_none()) {
        (Some(c), true) => {
            let f = c.f.ok_or_else(|| anyhow!("circuit.f is required to read couplings off the circuit"))?;
            Some(diagonalize(&c.params(f))?)
        }
        _ => None,
    };
    let p = match (d.phi_amplitude, &spec) {
        (Some(phi), Some(s)) => qubit_params_from_spectrum(s, phi, d.omega_0.unwrap_or((s.energies[1] - s.energies[0]) / (d.n as f64 + 1.0)))?,
        (Some(_), None) => bail!("drive.phi_amplitude needs a circuit block"),
        (None, _) => d.params()?,
    };
    // placeholder frequency; every tuning replaces it
    let omega = o.omega.unwrap_or(p.omega_q / 50.0);
    let osc = match (o.g1, o.g2, o.inductance_l, o.mutual_m, &spec) {
        (Some(g1), Some(g2), None, None, _) => OscillatorParams::new(omega, g1, g2, o.fock_cutoff)?,
        (None, None, Some(l), Some(m), Some(s)) => OscillatorParams::from_circuit(s, omega, l, m, o.fock_cutoff)?,
        _ => bail!("oscillator needs either g1 and g2, or inductance_l and mutual_m with a circuit block"),
    };
    Ok((p, osc))
}

fn settings(cfg: &RunConfig) -> anyhow::Result<RunSettings<f64>> {
    let o = cfg.oscillator()?;
    Ok(RunSettings { n: cfg.drive()?.n, periods: o.periods, samples_per_period: o.samples_per_period })
}

pub fn oscillator(cfg: &RunConfig, out: &mut Artifacts) -> anyhow::Result<()> {
    let (p, o) = drive_and_oscillator(cfg)?;
    let block = cfg.oscillator()?;
    let (outcome, trace) = run_tuning_traced(&p, &o, block.tuning, &settings(cfg)?, block.horizon)?;
    out.csv(
        "trace.csv",
        &["t", "excited_population", "photon_number", "tail"],
        (0..trace.times.len()).map(|k| {
            vec![num(trace.times[k]), num(trace.excited_population[k]), num(trace.photon_number[k]), num(trace.tail[k])]
        }),
    )?;
    out.json("summary.json", &outcome)
}

pub fn dispersive_check(cfg: &RunConfig, out: &mut Artifacts) -> anyhow::Result<()> {
    let block = cfg.oscillator()?;
    let omega_q = cfg.drive()?.omega_q()?;
    let omega = block.omega.ok_or_else(|| anyhow!("oscillator.omega is required"))?;
    let (g1, g2) = match (block.g1, block.g2) {
        (Some(a), Some(b)) => (a, b),
        _ => bail!("oscillator.g1 and oscillator.g2 are required"),
    };
    let o = OscillatorParams::new(omega, g1, g2, block.fock_cutoff)?;
    let c = dispersive_comparison(&o, omega_q, block.photons, block.second_order)?;
    out.csv(
        "dispersive.csv",
        &["qubit", "photons", "exact", "effective", "error"],
        c.labels.iter().enumerate().map(|(k, (q, m))| {
            vec![q.to_string(), m.to_string(), num(c.exact[k]), num(c.effective[k]), num((c.exact[k] - c.effective[k]).abs())]
        }),
    )?;
    out.json(
        "summary.json",
        &json!({
            "g1_over_delta": g1 / (omega_q - omega),
            "max_error": c.max_error,
            "tolerance": c.tolerance,
            "within_tolerance": c.max_error < c.tolerance,
        }),
    )
}

pub fn coexistence(cfg: &RunConfig, out: &mut Artifacts) -> anyhow::Result<()> {
    let (p, o) = drive_and_oscillator(cfg)?;
    let r = coexistence_experiment(&p, &o, &settings(cfg)?).context("coexistence experiment")?;
    let cases = [
        ("default", &r.single_photon),
        ("default", &r.two_photon),
        ("g2_zero", &r.without_g2[0]),
        ("g2_zero", &r.without_g2[1]),
        ("bessel_zero", &r.at_bessel_zero[0]),
        ("bessel_zero", &r.at_bessel_zero[1]),
    ];
    let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
    out.csv(
        "coexistence.csv",
        &["case", "tuning", "omega", "predicted", "extracted", "relative_error"],
        cases.iter().map(|(case, t)| {
            vec![
                case.to_string(),
                serde_json::to_value(t.tuning).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default(),
                num(t.omega),
                num(t.predicted),
                opt(t.extracted),
                opt(t.relative_error),
            ]
        }),
    )?;
    out.json(
        "coexistence.json",
        &json!({
            "report": r,
            "checks": {
                "coexist_within_10_percent": r.coexist(0.1),
                "single_photon_killed_without_g2": r.single_photon_killed_without_g2(),
                "killed_at_bessel_zero": r.killed_at_bessel_zero(),
            },
        }),
    )
}
