//! Experiment configuration: a TOML document whose tables mirror the
//! experiment structures field by field.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use suffset_core::scenario::ScenarioConfig;

/// Scenario table of the config file; field names match
/// [`suffset_core::scenario::ScenarioConfig`] exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub individuals: usize,
    pub universe_size: usize,
    pub attribute_dim: usize,
    pub consideration_size: usize,
    pub past_instances: usize,
    pub beta_true: Vec<f64>,
    #[serde(default)]
    pub attribute_drift_sigma: f64,
    #[serde(default)]
    pub behavior_drift_delta: f64,
    #[serde(default)]
    pub consideration_churn: f64,
    #[serde(default = "default_cohort_size")]
    pub cohort_size: usize,
    pub seed: u64,
}

fn default_cohort_size() -> usize {
    1
}

impl ScenarioSection {
    pub fn to_core(&self) -> ScenarioConfig {
        ScenarioConfig {
            individuals: self.individuals,
            universe_size: self.universe_size,
            attribute_dim: self.attribute_dim,
            consideration_size: self.consideration_size,
            past_instances: self.past_instances,
            beta_true: self.beta_true.clone(),
            attribute_drift_sigma: self.attribute_drift_sigma,
            behavior_drift_delta: self.behavior_drift_delta,
            consideration_churn: self.consideration_churn,
            cohort_size: self.cohort_size,
            seed: self.seed,
        }
    }
}

/// Which protocol builds the estimation sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProtocolSpec {
    /// Sets from each individual's own past choices.
    Pph,
    /// Sets pooled across cohorts of `cohort_size` consecutive individuals.
    Ip,
    /// Chosen alternative plus a uniform draw of nonchosen ones.
    RandomSample { sample_size: usize },
    /// `draws` iid draws with probabilities proportional to
    /// `exp(z)` of the designated attribute column.
    ImportanceSample { draws: usize, skew_attribute: usize },
}

impl ProtocolSpec {
    /// Stable label used in comparison reports.
    pub fn label(&self) -> String {
        match self {
            ProtocolSpec::Pph => "pph".into(),
            ProtocolSpec::Ip => "ip".into(),
            ProtocolSpec::RandomSample { sample_size } => {
                format!("random_sample_{sample_size}")
            }
            ProtocolSpec::ImportanceSample {
                draws,
                skew_attribute,
            } => {
                format!("importance_sample_{draws}_z{skew_attribute}")
            }
        }
    }
}

/// Which correction offsets enter the pseudo-likelihood.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrectionKind {
    None,
    UniformConditioning,
    KnownImportance,
    EmpiricalFrequency,
    /// Evaluation-only: rejected by estimation configs because the offsets
    /// depend on the parameters and flatten the likelihood.
    OracleExact,
}

impl CorrectionKind {
    pub fn label(self) -> &'static str {
        match self {
            CorrectionKind::None => "none",
            CorrectionKind::UniformConditioning => "uniform_conditioning",
            CorrectionKind::KnownImportance => "known_importance",
            CorrectionKind::EmpiricalFrequency => "empirical_frequency",
            CorrectionKind::OracleExact => "oracle_exact",
        }
    }
}

/// Optional sweep over one scenario dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SweepSpec {
    PastInstances(Vec<usize>),
    AttributeDriftSigma(Vec<f64>),
}

/// One Monte Carlo experiment: scenario, protocol, correction, replication
/// count, and an optional sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioSection,
    pub protocol: ProtocolSpec,
    pub correction: CorrectionKind,
    pub replications: usize,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text).context("parsing config")?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::from_toml_str(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        let core = self.scenario.to_core();
        core.validate().map_err(|e| anyhow::anyhow!("{e}"))?;
        if self.replications == 0 {
            bail!("replications must be at least 1");
        }

        match &self.protocol {
            ProtocolSpec::Pph => {}
            ProtocolSpec::Ip => {}
            ProtocolSpec::RandomSample { sample_size } => {
                if *sample_size == 0 || *sample_size > core.universe_size {
                    bail!("random_sample sample_size must lie in 1..=universe_size");
                }
                if core.consideration_size != core.universe_size {
                    bail!(
                        "random_sample assumes the full set is considered; \
                         set consideration_size = universe_size"
                    );
                }
            }
            ProtocolSpec::ImportanceSample { skew_attribute, .. } => {
                if *skew_attribute >= core.attribute_dim {
                    bail!("skew_attribute must index an attribute column");
                }
                if core.consideration_size != core.universe_size {
                    bail!(
                        "importance_sample assumes the full set is considered; \
                         set consideration_size = universe_size"
                    );
                }
            }
        }

        let pairing_ok = match self.correction {
            CorrectionKind::None => true,
            CorrectionKind::UniformConditioning => {
                matches!(self.protocol, ProtocolSpec::RandomSample { .. })
            }
            CorrectionKind::KnownImportance => {
                matches!(self.protocol, ProtocolSpec::ImportanceSample { .. })
            }
            CorrectionKind::EmpiricalFrequency => matches!(
                self.protocol,
                ProtocolSpec::Pph | ProtocolSpec::Ip | ProtocolSpec::ImportanceSample { .. }
            ),
            CorrectionKind::OracleExact => {
                bail!(
                    "the oracle_exact correction is evaluation-only: its offsets depend on the \
                     parameters and make the likelihood flat, so it cannot be estimated"
                );
            }
        };
        if !pairing_ok {
            bail!(
                "correction {} cannot be paired with protocol {}",
                self.correction.label(),
                self.protocol.label()
            );
        }

        if let Some(sweep) = &self.sweep {
            match sweep {
                SweepSpec::PastInstances(values) => {
                    if values.is_empty() {
                        bail!("sweep must list at least one value");
                    }
                }
                SweepSpec::AttributeDriftSigma(values) => {
                    if values.is_empty() {
                        bail!("sweep must list at least one value");
                    }
                    if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                        bail!("attribute_drift_sigma sweep values must be nonnegative");
                    }
                }
            }
        }
        Ok(())
    }
}

/// Config for the protocol comparison command: several experiment arms over
/// one shared scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    pub configs: Vec<ExperimentConfig>,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
}

impl CompareConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: CompareConfig = toml::from_str(text).context("parsing config")?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::from_toml_str(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        let first = match self.configs.first() {
            Some(first) => first,
            None => bail!("compare needs at least one config"),
        };
        for config in &self.configs {
            config.validate()?;
            if config.scenario != first.scenario {
                bail!("compare configs must share one scenario");
            }
            if config.sweep.is_some() {
                bail!("compare configs must not sweep");
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
        replications = 5
        correction = "none"

        [scenario]
        individuals = 100
        universe_size = 10
        attribute_dim = 2
        consideration_size = 10
        past_instances = 4
        beta_true = [1.0, -0.5]
        seed = 7

        [protocol]
        kind = "pph"
    "#;

    #[test]
    fn parses_a_minimal_config() {
        let config = ExperimentConfig::from_toml_str(BASE).unwrap();
        assert_eq!(config.replications, 5);
        assert_eq!(config.protocol, ProtocolSpec::Pph);
        assert_eq!(config.correction, CorrectionKind::None);
        assert_eq!(config.scenario.cohort_size, 1);
        assert_eq!(config.scenario.attribute_drift_sigma, 0.0);
        assert!(config.sweep.is_none());
    }

    #[test]
    fn parses_protocols_with_payloads() {
        let text = BASE.replace(
            "kind = \"pph\"",
            "kind = \"importance_sample\"\ndraws = 10\nskew_attribute = 1",
        );
        let text = text.replace("correction = \"none\"", "correction = \"known_importance\"");
        let config = ExperimentConfig::from_toml_str(&text).unwrap();
        assert_eq!(
            config.protocol,
            ProtocolSpec::ImportanceSample {
                draws: 10,
                skew_attribute: 1
            }
        );
        assert_eq!(config.correction, CorrectionKind::KnownImportance);
    }

    #[test]
    fn parses_sweeps() {
        let text = format!("{BASE}\n[sweep]\npast_instances = [3, 10, 30]\n");
        let config = ExperimentConfig::from_toml_str(&text).unwrap();
        assert_eq!(
            config.sweep,
            Some(SweepSpec::PastInstances(vec![3, 10, 30]))
        );
    }

    #[test]
    fn rejects_invalid_pairings() {
        let text = BASE.replace("correction = \"none\"", "correction = \"known_importance\"");
        let err = ExperimentConfig::from_toml_str(&text).unwrap_err();
        assert!(err.to_string().contains("cannot be paired"), "{err}");
    }

    #[test]
    fn rejects_oracle_exact_for_estimation() {
        let text = BASE.replace("correction = \"none\"", "correction = \"oracle_exact\"");
        let err = ExperimentConfig::from_toml_str(&text).unwrap_err();
        assert!(err.to_string().contains("evaluation-only"), "{err}");
    }

    #[test]
    fn rejects_latent_sets_for_sampling_protocols() {
        let text = BASE
            .replace(
                "kind = \"pph\"",
                "kind = \"random_sample\"\nsample_size = 3",
            )
            .replace("consideration_size = 10", "consideration_size = 5");
        let err = ExperimentConfig::from_toml_str(&text).unwrap_err();
        assert!(err.to_string().contains("full set"), "{err}");
    }

    #[test]
    fn rejects_unknown_fields() {
        // Top-level key, ahead of the tables so it stays at the root.
        let text = format!("bogus_knob = 3\n{BASE}");
        assert!(ExperimentConfig::from_toml_str(&text).is_err());
    }

    #[test]
    fn compare_requires_shared_scenario() {
        let one = ExperimentConfig::from_toml_str(BASE).unwrap();
        let mut other = one.clone();
        other.scenario.seed = 8;
        let compare = CompareConfig {
            configs: vec![one.clone(), other],
            output_path: None,
        };
        assert!(compare.validate().is_err());

        let compare = CompareConfig {
            configs: vec![one.clone(), one],
            output_path: None,
        };
        assert!(compare.validate().is_ok());
    }
}
