//! Experiment configuration: one JSON document, unknown fields rejected.

use std::path::{Path, PathBuf};

use fractalcap_core::socialgraph::KmaxRule;
use fractalcap_core::wireless::DestinationRule;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{io_err, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KmaxChoice {
    #[default]
    Sqrt,
    Full,
}

impl From<KmaxChoice> for KmaxRule {
    fn from(k: KmaxChoice) -> Self {
        match k {
            KmaxChoice::Sqrt => KmaxRule::Sqrt,
            KmaxChoice::Full => KmaxRule::Full,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum RuleConfig {
    Uniform {},
    Powerlaw {
        beta: f64,
    },
    Hierarchical {},
}

impl Default for RuleConfig {
    fn default() -> Self {
        RuleConfig::Uniform {}
    }
}

impl RuleConfig {
    pub fn destination_rule(self) -> DestinationRule {
        match self {
            RuleConfig::Uniform {} => DestinationRule::Uniform,
            RuleConfig::Powerlaw { beta } => DestinationRule::PowerLaw { beta },
            RuleConfig::Hierarchical {} => DestinationRule::Hierarchical,
        }
    }

    pub fn label(self) -> &'static str {
        self.destination_rule().name()
    }

    pub fn beta(self) -> Option<f64> {
        self.destination_rule().beta()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_values: Vec<usize>,
    pub gamma: f64,
    pub epsilon: f64,
    #[serde(default)]
    pub kmax: KmaxChoice,
    #[serde(default)]
    pub rule: RuleConfig,
    #[serde(default = "one")]
    pub c0: f64,
    #[serde(default = "one")]
    pub c1: f64,
    #[serde(default = "one")]
    pub delta: f64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn one() -> f64 {
    1.0
}

fn default_trials() -> usize {
    10_000
}

fn default_seeds() -> Vec<u64> {
    (0..5).collect()
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n_values: (11..=16).map(|e| 1usize << e).collect(),
            gamma: 2.5,
            epsilon: 2.5,
            kmax: KmaxChoice::Sqrt,
            rule: RuleConfig::Uniform {},
            c0: 1.0,
            c1: 1.0,
            delta: 1.0,
            trials: default_trials(),
            seeds: default_seeds(),
            output_dir: default_output_dir(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.n_values.is_empty() {
            return fail("n_values is empty".into());
        }
        if self.n_values.windows(2).any(|w| w[0] >= w[1]) {
            return fail("n_values must be strictly increasing".into());
        }
        if self.n_values[0] < 2 {
            return fail("every n must be at least 2".into());
        }
        if self.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        if self.seeds.is_empty() {
            return fail("seeds is empty".into());
        }
        if !(self.gamma > 2.0 && self.gamma.is_finite()) {
            return fail(format!("gamma must exceed 2, got {}", self.gamma));
        }
        if !(self.epsilon > 2.0 && self.epsilon.is_finite()) {
            return fail(format!("epsilon must exceed 2, got {}", self.epsilon));
        }
        for (name, v) in [("c0", self.c0), ("c1", self.c1)] {
            if !(v > 0.0 && v.is_finite()) {
                return fail(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return fail(format!("delta must be non-negative, got {}", self.delta));
        }
        if let RuleConfig::Powerlaw { beta } = self.rule {
            if !(beta >= 0.0 && beta.is_finite()) {
                return fail(format!("beta must be non-negative, got {beta}"));
            }
        }
        Ok(())
    }

    /// Short digest of the canonical JSON form; equal configs share an id.
    pub fn experiment_id(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().take(6).map(|b| format!("{b:02x}")).collect()
    }

    pub fn kmax_for(&self, n: usize) -> usize {
        KmaxRule::from(self.kmax).resolve(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = ExperimentConfig::from_json(r#"{"n_values":[100,200],"gamma":2.5,"epsilon":2.5}"#).unwrap();
        assert_eq!(c.trials, 10_000);
        assert_eq!(c.rule, RuleConfig::Uniform {});
        assert_eq!(c.kmax, KmaxChoice::Sqrt);
        assert_eq!((c.c0, c.c1, c.delta), (1.0, 1.0, 1.0));
    }

    #[test]
    fn full_config_round_trips() {
        let text = r#"{"n_values":[2048],"gamma":2.4,"epsilon":2.6,"kmax":"full",
            "rule":{"kind":"powerlaw","beta":2.5},"c0":1.5,"c1":0.5,"delta":2.0,
            "trials":10,"seeds":[3],"output_dir":"x"}"#;
        let c = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(c.rule, RuleConfig::Powerlaw { beta: 2.5 });
        let again = ExperimentConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.experiment_id(), again.experiment_id());
        assert_eq!(c.experiment_id().len(), 12);
        let h = ExperimentConfig::from_json(r#"{"n_values":[64],"gamma":2.5,"epsilon":2.5,"rule":{"kind":"hierarchical"}}"#);
        assert_eq!(h.unwrap().rule, RuleConfig::Hierarchical {});
    }

    #[test]
    fn unknown_fields_are_rejected() {
        for text in [
            r#"{"n_values":[100],"gamma":2.5,"epsilon":2.5,"trails":5}"#,
            r#"{"n_values":[100],"gamma":2.5,"epsilon":2.5,"rule":{"kind":"uniform","beta":1}}"#,
            r#"{"n_values":[100],"gamma":2.5,"epsilon":2.5,"rule":{"kind":"random"}}"#,
            r#"{"n_values":[100],"gamma":2.5,"epsilon":2.5,"rule":{"kind":"hierarchical","levels":2}}"#,
        ] {
            assert!(matches!(ExperimentConfig::from_json(text), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn invariants_are_checked() {
        for text in [
            r#"{"n_values":[],"gamma":2.5,"epsilon":2.5}"#,
            r#"{"n_values":[200,100],"gamma":2.5,"epsilon":2.5}"#,
            r#"{"n_values":[100],"gamma":2.0,"epsilon":2.5}"#,
            r#"{"n_values":[100],"gamma":2.5,"epsilon":1.5}"#,
            r#"{"n_values":[100],"gamma":2.5,"epsilon":2.5,"trials":0}"#,
            r#"{"n_values":[100],"gamma":2.5,"epsilon":2.5,"rule":{"kind":"powerlaw","beta":-1}}"#,
        ] {
            assert!(ExperimentConfig::from_json(text).is_err(), "{text}");
        }
    }
}
