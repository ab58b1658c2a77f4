//! Experiment configuration: one TOML file describes the model, its
//! parameters, the randomized parameter laws, the run geometry and the
//! output sinks. Parsing is strict (unknown fields are errors) and the
//! parsed form round-trips through serialization unchanged.

use qri_core::dist::Law;
use qri_core::spin_fermion::{SpectralDensity, SpinFermionParams};
use qri_core::spin_spin::{SpinSpinEnsemble, SpinSpinParams, Varying};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    pub params: ParamsBlock,
    #[serde(default)]
    pub distributions: BTreeMap<String, DistributionSpec>,
    pub run: RunBlock,
    #[serde(default)]
    pub sweep: Option<SweepBlock>,
    #[serde(default)]
    pub outputs: Vec<OutputSpec>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    SpinSpin,
    SpinFermion,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ParamsBlock {
    // spin-spin fields
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_e: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    // shared
    pub lambda: f64,
    // spin-fermion fields
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<DensityBlock>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DensityBlock {
    pub r_cut: f64,
    pub nodes: usize,
}

impl Default for DensityBlock {
    fn default() -> Self {
        DensityBlock { r_cut: 40.0, nodes: 256 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionSpec {
    Point { value: f64 },
    Finite { atoms: Vec<(f64, f64)> },
    Uniform { lo: f64, hi: f64 },
}

impl DistributionSpec {
    pub fn to_law(&self) -> Law {
        match self {
            DistributionSpec::Point { value } => Law::Point(*value),
            DistributionSpec::Finite { atoms } => Law::Finite(atoms.clone()),
            DistributionSpec::Uniform { lo, hi } => Law::Uniform { lo: *lo, hi: *hi },
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunBlock {
    pub n_steps: usize,
    #[serde(default = "default_trajectories")]
    pub n_trajectories: usize,
    pub seed: u64,
    #[serde(default = "default_window")]
    pub cesaro_window: usize,
}

fn default_trajectories() -> usize {
    1
}

fn default_window() -> usize {
    1000
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_max: Option<f64>,
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_points() -> usize {
    100
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub kind: OutputKind,
    pub path: String,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    Csv,
    Json,
}

/// Configuration or schema error; maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    #[cfg(test)]
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the canonical (JSON) form of the parsed config.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for key in self.distributions.keys() {
            let known = matches!(key.as_str(), "tau" | "beta" | "e_e" | "sigma");
            if !known {
                return Err(ConfigError(format!(
                    "unknown distribution '{key}' (expected tau, beta, e_e or sigma)"
                )));
            }
        }
        match self.model {
            ModelKind::SpinSpin => {
                for field in ["e_s", "e_e", "beta", "tau"] {
                    let present = match field {
                        "e_s" => self.params.e_s.is_some(),
                        "e_e" => self.params.e_e.is_some(),
                        "beta" => self.params.beta.is_some(),
                        _ => self.params.tau.is_some(),
                    };
                    if !present {
                        return Err(ConfigError(format!(
                            "spin_spin model needs params.{field}"
                        )));
                    }
                }
                if self.distributions.contains_key("sigma") {
                    return Err(ConfigError(
                        "distribution 'sigma' belongs to the spin_fermion model".into(),
                    ));
                }
                let varying = ["tau", "beta", "e_e"]
                    .iter()
                    .filter(|k| self.distributions.contains_key(**k))
                    .count();
                if varying > 1 {
                    return Err(ConfigError(
                        "spin_spin supports one varying parameter at a time (tau, beta or e_e)"
                            .into(),
                    ));
                }
                self.spin_spin_params().map(|_| ())?;
            }
            ModelKind::SpinFermion => {
                if self.params.tau0.is_none() {
                    return Err(ConfigError("spin_fermion model needs params.tau0".into()));
                }
                for key in ["tau", "e_e"] {
                    if self.distributions.contains_key(key) {
                        return Err(ConfigError(format!(
                            "distribution '{key}' belongs to the spin_spin model"
                        )));
                    }
                }
                self.spin_fermion_params().map(|_| ())?;
            }
        }
        if self.run.n_steps == 0 || self.run.n_trajectories == 0 || self.run.cesaro_window == 0 {
            return Err(ConfigError(
                "run.n_steps, run.n_trajectories and run.cesaro_window must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn spin_spin_params(&self) -> Result<SpinSpinParams, ConfigError> {
        SpinSpinParams::new(
            self.params.e_s.unwrap_or_default(),
            self.params.e_e.unwrap_or_default(),
            self.params.lambda,
            self.params.beta.unwrap_or_default(),
            self.params.tau.unwrap_or_default(),
        )
        .map_err(|e| ConfigError(e.to_string()))
    }

    /// The spin-spin ensemble with its single varying parameter. Errors if
    /// no distribution is given (deterministic runs use a point mass).
    pub fn spin_spin_ensemble(&self) -> Result<SpinSpinEnsemble, ConfigError> {
        let base = self.spin_spin_params()?;
        let (vary, law) = if let Some(spec) = self.distributions.get("tau") {
            (Varying::Tau, spec.to_law())
        } else if let Some(spec) = self.distributions.get("beta") {
            (Varying::Beta, spec.to_law())
        } else if let Some(spec) = self.distributions.get("e_e") {
            (Varying::EnergyE, spec.to_law())
        } else {
            (Varying::Tau, Law::Point(base.tau))
        };
        SpinSpinEnsemble::new(base, vary, law).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn spin_fermion_params(&self) -> Result<SpinFermionParams, ConfigError> {
        let density = self.params.density.unwrap_or_default();
        let sigma_law = self
            .distributions
            .get("sigma")
            .map(|s| s.to_law())
            .unwrap_or(Law::Point(0.0));
        let beta_law = self
            .distributions
            .get("beta")
            .map(|s| s.to_law())
            .unwrap_or(Law::Point(1.0));
        let p = SpinFermionParams {
            lambda: self.params.lambda,
            tau0: self.params.tau0.unwrap_or_default(),
            sigma_law,
            beta_law,
            density: SpectralDensity::default_bath(density.r_cut, density.nodes),
        };
        p.validate().map_err(|e| ConfigError(e.to_string()))?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPIN_SPIN: &str = r#"
model = "spin_spin"

[params]
e_s = 1.0
e_e = 2.0
lambda = 0.5
beta = 1.0
tau = 1.0

[distributions.tau]
kind = "uniform"
lo = 0.8
hi = 1.2

[run]
n_steps = 1000
n_trajectories = 2
seed = 42
cesaro_window = 100

[[outputs]]
kind = "csv"
path = "series.csv"
"#;

    #[test]
    fn parse_and_round_trip() {
        let cfg = ExperimentConfig::from_toml(SPIN_SPIN).unwrap();
        assert_eq!(cfg.model, ModelKind::SpinSpin);
        assert_eq!(cfg.run.seed, 42);
        let text = cfg.to_toml();
        let back = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(cfg.hash(), back.hash());
    }

    #[test]
    fn rejects_unknown_fields_and_bad_models() {
        assert!(ExperimentConfig::from_toml("model = \"banana\"").is_err());
        let bad = SPIN_SPIN.replace("[params]", "[params]\nbogus_knob = 1.0");
        assert!(ExperimentConfig::from_toml(&bad).is_err());
        let bad = SPIN_SPIN.replace("[distributions.tau]", "[distributions.sigma]");
        assert!(ExperimentConfig::from_toml(&bad).is_err());
    }

    #[test]
    fn seed_is_mandatory() {
        let bad = SPIN_SPIN.replace("seed = 42\n", "");
        assert!(ExperimentConfig::from_toml(&bad).is_err());
    }

    #[test]
    fn two_varying_parameters_rejected() {
        let bad = format!("{SPIN_SPIN}\n[distributions.beta]\nkind = \"point\"\nvalue = 1.0\n");
        assert!(ExperimentConfig::from_toml(&bad).is_err());
    }

    #[test]
    fn spin_fermion_config() {
        let text = r#"
model = "spin_fermion"

[params]
lambda = 0.05
tau0 = 1.3

[distributions.sigma]
kind = "uniform"
lo = -0.05
hi = 0.05

[distributions.beta]
kind = "point"
value = 1.0

[run]
n_steps = 1000
seed = 7
"#;
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        let p = cfg.spin_fermion_params().unwrap();
        assert_eq!(p.lambda, 0.05);
        assert_eq!(p.density.nodes.len(), 256);
    }

    #[test]
    fn hash_changes_with_content() {
        let a = ExperimentConfig::from_toml(SPIN_SPIN).unwrap();
        let b_text = SPIN_SPIN.replace("seed = 42", "seed = 43");
        let b = ExperimentConfig::from_toml(&b_text).unwrap();
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
