//! Experiment configuration: a JSON document with a master seed, an optional
//! registry of named ε functions and test functions, and per-command blocks.
//! Command-line flags override the file; the merged document is what gets hashed.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use stablerate::tail::{EpsFn, TailModel};
use stablerate::testfn::TestFunction;

use crate::CliError;

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Registry {
    /// Name → ε text such as `power:c=0.2,gamma=1`; referenced as `@name` in model specs.
    #[serde(default)]
    pub eps: BTreeMap<String, String>,
    /// Name → test-function text such as `cos:2`; referenced as `@name`.
    #[serde(default)]
    pub test_functions: BTreeMap<String, String>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SampleBlock {
    pub model: Option<String>,
    pub count: Option<usize>,
    /// `model`, `limit` or `sum`.
    pub source: Option<String>,
    pub terms: Option<u64>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TvBlock {
    pub model: Option<String>,
    pub n: Option<u64>,
    /// `exact` or `histogram`.
    pub method: Option<String>,
    pub nodes: Option<usize>,
    pub samples: Option<usize>,
    pub bins: Option<usize>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DeltaBlock {
    pub alpha: Option<f64>,
    pub d: Option<usize>,
    pub n_min: Option<f64>,
    pub n_max: Option<f64>,
    /// `printed` or `corrected`.
    pub limit: Option<String>,
    pub tol: Option<f64>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub scenario: Option<String>,
    pub model: Option<String>,
    pub n_min: Option<u64>,
    pub n_max: Option<u64>,
    pub method: Option<String>,
    pub nodes: Option<usize>,
    pub samples: Option<usize>,
    pub bins: Option<usize>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DecompositionBlock {
    pub model: Option<String>,
    /// `light` or `heavy`.
    pub kind: Option<String>,
    pub alpha_tilde: Option<f64>,
    pub samples: Option<usize>,
    pub bins: Option<usize>,
    pub switch: Option<f64>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProbeBlock {
    /// `gap`, `gradient`, `generator` or `bound`.
    pub kind: Option<String>,
    pub model: Option<String>,
    pub f: Option<String>,
    pub n: Option<u64>,
    pub n_min: Option<u64>,
    pub n_max: Option<u64>,
    pub samples: Option<usize>,
    pub x: Option<f64>,
    pub order: Option<usize>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub output_dir: Option<String>,
    pub workers: Option<usize>,
    #[serde(default)]
    pub registry: Registry,
    pub sample: Option<SampleBlock>,
    pub tv: Option<TvBlock>,
    pub delta: Option<DeltaBlock>,
    pub sweep: Option<SweepBlock>,
    pub decomposition: Option<DecompositionBlock>,
    pub probe: Option<ProbeBlock>,
}

impl ExperimentConfig {
    /// Reads a config file, or the `config` member of a run manifest.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        let mut value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        if let Some(inner) = value.get_mut("config").map(serde_json::Value::take) {
            value = inner;
        }
        let cfg: ExperimentConfig = serde_json::from_value(value).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        if cfg.seed.is_none() {
            return Err(CliError::Usage(format!("{}: `seed` is mandatory", path.display())));
        }
        cfg.check_registry()?;
        Ok(cfg)
    }

    fn check_registry(&self) -> Result<(), CliError> {
        for (name, text) in &self.registry.eps {
            EpsFn::parse(text).map_err(|e| CliError::Usage(format!("registry eps '{name}': {e}")))?;
        }
        for (name, text) in &self.registry.test_functions {
            TestFunction::parse(text, 1).map_err(|e| CliError::Usage(format!("registry test function '{name}': {e}")))?;
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    /// SHA-256 of the canonical JSON form (object keys sorted). The output
    /// directory and worker count do not change results and are left out.
    pub fn hash(&self) -> String {
        let scientific = ExperimentConfig { output_dir: None, workers: None, ..self.clone() };
        let value = serde_json::to_value(&scientific).expect("config serializes");
        let bytes = serde_json::to_vec(&value).expect("config serializes");
        let digest = Sha256::digest(&bytes);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Substitutes `@name` references from the ε registry, then parses the model.
    pub fn model(&self, spec: &str) -> Result<TailModel, CliError> {
        let mut text = spec.to_string();
        while let Some(start) = text.find('@') {
            let rest = &text[start + 1..];
            let end = rest.find([',', ';']).unwrap_or(rest.len());
            let name = &rest[..end];
            let eps = self
                .registry
                .eps
                .get(name)
                .ok_or_else(|| CliError::Usage(format!("model '{spec}' references unknown ε '@{name}'")))?;
            text = format!("{}{}{}", &text[..start], eps, &rest[end..]);
        }
        TailModel::parse(&text).map_err(|e| CliError::Usage(format!("model '{spec}': {e}")))
    }

    pub fn test_function(&self, spec: &str, dim: usize) -> Result<TestFunction, CliError> {
        let text = match spec.strip_prefix('@') {
            Some(name) => self
                .registry
                .test_functions
                .get(name)
                .ok_or_else(|| CliError::Usage(format!("unknown test function '@{name}'")))?
                .as_str(),
            None => spec,
        };
        TestFunction::parse(text, dim).map_err(|e| CliError::Usage(e.to_string()))
    }
}

pub const DEFAULT_SEED: u64 = 1;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_ignores_key_order() {
        let a: ExperimentConfig = serde_json::from_str(r#"{"seed": 3, "workers": 2}"#).unwrap();
        let b: ExperimentConfig = serde_json::from_str(r#"{"workers": 2, "seed": 3}"#).unwrap();
        assert_eq!(a.hash(), b.hash());
        let c: ExperimentConfig = serde_json::from_str(r#"{"workers": 2, "seed": 4}"#).unwrap();
        assert_ne!(a.hash(), c.hash());
        let d: ExperimentConfig = serde_json::from_str(r#"{"workers": 8, "seed": 3, "output_dir": "elsewhere"}"#).unwrap();
        assert_eq!(a.hash(), d.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn registry_references_resolve() {
        let mut cfg = ExperimentConfig::default();
        cfg.registry.eps.insert("decay".into(), "power:c=0.2,gamma=1".into());
        let m = cfg.model("dna:alpha=1.3,A=1,wp=0.7,wm=0.3,eps+=@decay,eps-=zero,gamma=1,K=1").unwrap();
        assert_eq!(m.alpha(), 1.3);
        assert!(cfg.model("dna:alpha=1.3,A=1,wp=0.7,wm=0.3,eps=@missing,gamma=1,K=1").is_err());
        cfg.registry.test_functions.insert("smooth".into(), "cos:2".into());
        assert_eq!(cfg.test_function("@smooth", 1).unwrap(), TestFunction::Cos { freq: vec![2.0], phase: 0.0 });
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"seed": 1, "sede": 2}"#).is_err());
    }
}
