use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use fluxlab::drive::Longitudinal;
use fluxlab::oscillator::{SecondOrder, Tuning};
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Evenly spaced grid, both ends included.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Grid {
    pub fn values(&self, what: &str) -> anyhow::Result<Vec<f64>> {
        if self.points < 2 || !(self.stop > self.start) {
            bail!("{what}: need points >= 2 and stop > start");
        }
        Ok(fluxlab::numerics::linspace(self.start, self.stop, self.points))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitBlock {
    pub alpha: f64,
    pub ej_over_ec: f64,
    pub truncation: usize,
    #[serde(default = "default_levels")]
    pub n_levels: usize,
    /// Flux grid for `spectrum` and `matrix-elements`.
    pub flux: Option<Grid>,
    /// Single bias point, used when couplings are read off the circuit.
    pub f: Option<f64>,
}

fn default_levels() -> usize {
    5
}

impl CircuitBlock {
    pub fn params(&self, f: f64) -> fluxlab::CircuitParams {
        fluxlab::CircuitParams {
            alpha: self.alpha,
            ej_over_ec: self.ej_over_ec,
            f,
            truncation: self.truncation,
            n_levels: self.n_levels,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveBlock {
    pub omega_q: Option<f64>,
    pub lambda_x: Option<f64>,
    pub lambda_z: Option<f64>,
    /// `2λ_z/ω₀`; alternative to `lambda_z`.
    pub x: Option<f64>,
    pub omega_0: Option<f64>,
    #[serde(default)]
    pub n: i32,
    pub omega_0_grid: Option<Grid>,
    pub x_grid: Option<Grid>,
    pub horizon: Option<f64>,
    /// Flux drive amplitude when the drive is read off the circuit.
    pub phi_amplitude: Option<f64>,
}

impl DriveBlock {
    pub fn omega_q(&self) -> anyhow::Result<f64> {
        self.omega_q.ok_or_else(|| anyhow!("drive.omega_q is required"))
    }

    pub fn lambda_x(&self) -> anyhow::Result<f64> {
        self.lambda_x.ok_or_else(|| anyhow!("drive.lambda_x is required"))
    }

    pub fn omega_0(&self) -> anyhow::Result<f64> {
        match self.omega_0 {
            Some(w) => Ok(w),
            None => Ok(self.omega_q()? / (self.n as f64 + 1.0)),
        }
    }

    pub fn horizon(&self) -> anyhow::Result<f64> {
        self.horizon.ok_or_else(|| anyhow!("drive.horizon is required"))
    }

    pub fn longitudinal(&self) -> anyhow::Result<Longitudinal<f64>> {
        match (self.lambda_z, self.x) {
            (Some(l), None) => Ok(Longitudinal::Amplitude(l)),
            (None, Some(x)) => Ok(Longitudinal::Ratio(x)),
            (None, None) => bail!("drive needs one of lambda_z or x"),
            (Some(_), Some(_)) => bail!("drive.lambda_z and drive.x are mutually exclusive"),
        }
    }

    /// Drive parameters at a single `ω₀`.
    pub fn params(&self) -> anyhow::Result<fluxlab::DriveParams> {
        let omega_0 = self.omega_0()?;
        let lambda_z = match self.longitudinal()? {
            Longitudinal::Amplitude(l) => l,
            Longitudinal::Ratio(x) => x * omega_0 / 2.0,
        };
        Ok(fluxlab::DriveParams { omega_q: self.omega_q()?, lambda_x: self.lambda_x()?, lambda_z, omega_0 })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathBlock {
    #[serde(default = "default_modes")]
    pub modes: usize,
    /// Band width in units of `ω_q`.
    #[serde(default = "default_width")]
    pub width: f64,
    /// Half-life of the undriven decay in drive periods.
    #[serde(default = "default_half_life")]
    pub half_life_periods: f64,
    /// Randomize the coupling phases with `seed`.
    #[serde(default)]
    pub random_phases: bool,
}

fn default_modes() -> usize {
    fluxlab::bath::DEFAULT_MODES
}

fn default_width() -> f64 {
    fluxlab::bath::DEFAULT_WIDTH
}

fn default_half_life() -> f64 {
    fluxlab::bath::DEFAULT_HALF_LIFE_PERIODS
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillatorBlock {
    /// Fixed oscillator frequency; the tunings ignore it.
    pub omega: Option<f64>,
    pub g1: Option<f64>,
    pub g2: Option<f64>,
    pub inductance_l: Option<f64>,
    pub mutual_m: Option<f64>,
    #[serde(default = "default_cutoff")]
    pub fock_cutoff: usize,
    #[serde(default = "default_tuning")]
    pub tuning: Tuning,
    #[serde(default = "default_periods")]
    pub periods: f64,
    #[serde(default = "default_samples")]
    pub samples_per_period: usize,
    /// Overrides the horizon sized from the predicted frequency.
    pub horizon: Option<f64>,
    /// Levels per qubit branch compared by `dispersive-check`.
    #[serde(default = "default_photons")]
    pub photons: usize,
    #[serde(default)]
    pub second_order: SecondOrder,
}

fn default_cutoff() -> usize {
    12
}

fn default_tuning() -> Tuning {
    Tuning::SinglePhoton
}

fn default_periods() -> f64 {
    4.0
}

fn default_samples() -> usize {
    64
}

fn default_photons() -> usize {
    2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub circuit: Option<CircuitBlock>,
    pub drive: Option<DriveBlock>,
    pub bath: Option<BathBlock>,
    pub oscillator: Option<OscillatorBlock>,
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

impl RunConfig {
    pub fn load(path: &Path, overrides: &[String]) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut value: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        serde_json::from_value(value).context("invalid configuration")
    }

    pub fn circuit(&self) -> anyhow::Result<&CircuitBlock> {
        self.circuit.as_ref().ok_or_else(|| anyhow!("this subcommand needs a `circuit` block"))
    }

    pub fn drive(&self) -> anyhow::Result<&DriveBlock> {
        self.drive.as_ref().ok_or_else(|| anyhow!("this subcommand needs a `drive` block"))
    }

    pub fn bath(&self) -> anyhow::Result<&BathBlock> {
        self.bath.as_ref().ok_or_else(|| anyhow!("this subcommand needs a `bath` block"))
    }

    pub fn oscillator(&self) -> anyhow::Result<&OscillatorBlock> {
        self.oscillator.as_ref().ok_or_else(|| anyhow!("this subcommand needs an `oscillator` block"))
    }
}

/// `a.b.c=value`. The value is read as JSON, or as a string if that fails.
/// Only scalar fields can be overridden.
pub fn apply_override(root: &mut Value, spec: &str) -> anyhow::Result<()> {
    let (path, raw) = spec.split_once('=').ok_or_else(|| anyhow!("override `{spec}` is not key=value"))?;
    let new: Value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    if new.is_object() || new.is_array() {
        bail!("override `{spec}`: only scalar values can be set");
    }
    let mut node = root;
    let keys: Vec<&str> = path.split('.').collect();
    for (i, key) in keys.iter().enumerate() {
        let obj = node.as_object_mut().ok_or_else(|| anyhow!("override `{path}`: `{}` is not a block", keys[..i].join(".")))?;
        if i + 1 == keys.len() {
            obj.insert(key.to_string(), new);
            return Ok(());
        }
        node = obj.entry(key.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_nest_and_parse() {
        let mut v: Value = serde_json::json!({"drive": {"omega_q": 1.0}});
        apply_override(&mut v, "drive.omega_q=2.5").unwrap();
        apply_override(&mut v, "oscillator.tuning=two-photon").unwrap();
        apply_override(&mut v, "seed=7").unwrap();
        assert_eq!(v["drive"]["omega_q"], 2.5);
        assert_eq!(v["oscillator"]["tuning"], "two-photon");
        assert_eq!(v["seed"], 7);
        assert!(apply_override(&mut v, "drive.omega_q").is_err());
        assert!(apply_override(&mut v, "drive.omega_q.x=1").is_err());
        assert!(apply_override(&mut v, "drive={}").is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        let v = serde_json::json!({"drive": {"omega_q": 1.0, "omgea_0": 1.0}});
        assert!(serde_json::from_value::<RunConfig>(v).is_err());
        let v = serde_json::json!({"colour": 1});
        assert!(serde_json::from_value::<RunConfig>(v).is_err());
    }

    #[test]
    fn longitudinal_is_exclusive() {
        let d: DriveBlock = serde_json::from_value(serde_json::json!({"lambda_z": 0.1, "x": 1.0})).unwrap();
        assert!(d.longitudinal().is_err());
        let d: DriveBlock = serde_json::from_value(serde_json::json!({"omega_q": 1.0, "lambda_x": 0.02, "x": 1.0})).unwrap();
        let p = d.params().unwrap();
        assert_eq!(p.omega_0, 1.0);
        assert_eq!(p.lambda_z, 0.5);
    }
}
