//! Newline-delimited plain-text file formats.
//!
//! The public dataset holds only what a researcher observes: one header
//! record with the scenario dimensions, then one record per (individual,
//! instance) carrying the chosen alternative and the attribute snapshot
//! over the universal set. The latent side — consideration sets, true
//! parameters, drift knobs — goes to a separate oracle sidecar consumed
//! only by evaluation code.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use suffset_core::model::AttributeMatrix;
use suffset_core::scenario::{
    ChoiceHistory, IndividualHistory, Instance, Population, ScenarioConfig,
};
use suffset_core::sets::SufficientSet;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct HeaderRecord {
    schema_version: u32,
    individuals: usize,
    universe_size: usize,
    attribute_dim: usize,
    past_instances: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct InstanceRecord {
    individual_id: u64,
    /// 1-based; the modeled choice is instance `past_instances + 1`.
    instance: usize,
    chosen_alt: u32,
    /// Universe-sized matrix, one row of `attribute_dim` values per
    /// alternative.
    attributes: Vec<Vec<f64>>,
}

/// Per-individual latent record for evaluation code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRecord {
    pub individual_id: u64,
    pub consideration_set: Vec<u32>,
    pub beta_true: Vec<f64>,
    pub attribute_drift_sigma: f64,
    pub behavior_drift_delta: f64,
    pub consideration_churn: f64,
}

/// Write the observable dataset as JSON lines: header first, then one
/// record per (individual, instance).
pub fn write_dataset(history: &ChoiceHistory, path: &Path) -> Result<()> {
    let file =
        File::create(path).with_context(|| format!("creating dataset {}", path.display()))?;
    let mut writer = BufWriter::new(file);
    let header = HeaderRecord {
        schema_version: SCHEMA_VERSION,
        individuals: history.individuals.len(),
        universe_size: history.universe_size,
        attribute_dim: history.attribute_dim,
        past_instances: history.past_instances,
    };
    serde_json::to_writer(&mut writer, &header)?;
    writer.write_all(b"\n")?;

    for individual in &history.individuals {
        for (r, instance) in individual.instances.iter().enumerate() {
            let attributes: Vec<Vec<f64>> = (0..history.universe_size)
                .map(|alt| instance.attributes.row(alt).to_vec())
                .collect();
            let record = InstanceRecord {
                individual_id: individual.individual_id,
                instance: r + 1,
                chosen_alt: instance.chosen,
                attributes,
            };
            serde_json::to_writer(&mut writer, &record)?;
            writer.write_all(b"\n")?;
        }
    }
    writer.flush()?;
    Ok(())
}

/// Read a dataset back; errors carry the offending line number.
pub fn read_dataset(path: &Path) -> Result<ChoiceHistory> {
    let file = File::open(path).with_context(|| format!("opening dataset {}", path.display()))?;
    let mut lines = BufReader::new(file).lines().enumerate();

    let (_, header_line) = lines
        .next()
        .ok_or_else(|| anyhow::anyhow!("dataset {} is empty", path.display()))?;
    let header: HeaderRecord = serde_json::from_str(&header_line?)
        .with_context(|| format!("{}: line 1: bad header", path.display()))?;
    if header.schema_version != SCHEMA_VERSION {
        bail!(
            "{}: unsupported schema_version {} (expected {})",
            path.display(),
            header.schema_version,
            SCHEMA_VERSION
        );
    }

    let per_individual = header.past_instances + 1;
    let mut individuals: Vec<IndividualHistory> = Vec::with_capacity(header.individuals);
    let mut current: Option<IndividualHistory> = None;

    for (index, line) in lines {
        let line_no = index + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: InstanceRecord = serde_json::from_str(&line)
            .with_context(|| format!("{}: line {line_no}: bad record", path.display()))?;

        if record.attributes.len() != header.universe_size
            || record
                .attributes
                .iter()
                .any(|row| row.len() != header.attribute_dim)
        {
            bail!(
                "{}: line {line_no}: attributes must be a {}x{} array",
                path.display(),
                header.universe_size,
                header.attribute_dim
            );
        }
        if record.chosen_alt as usize >= header.universe_size {
            bail!(
                "{}: line {line_no}: chosen_alt out of range",
                path.display()
            );
        }

        let values: Vec<f64> = record.attributes.into_iter().flatten().collect();
        let attributes = AttributeMatrix::new(header.universe_size, header.attribute_dim, values)
            .map_err(|e| anyhow::anyhow!("{}: line {line_no}: {e}", path.display()))?;
        let instance = Instance {
            chosen: record.chosen_alt,
            attributes: Arc::new(attributes),
        };

        let expected_instance = current.as_ref().map_or(1, |ind| ind.instances.len() + 1);
        let same_individual = current
            .as_ref()
            .is_some_and(|ind| ind.individual_id == record.individual_id);
        if same_individual {
            if record.instance != expected_instance {
                bail!(
                    "{}: line {line_no}: instance {} out of order (expected {})",
                    path.display(),
                    record.instance,
                    expected_instance
                );
            }
            current.as_mut().unwrap().instances.push(instance);
        } else {
            if let Some(done) = current.take() {
                if done.instances.len() != per_individual {
                    bail!(
                        "{}: line {line_no}: individual {} has {} instances (expected {})",
                        path.display(),
                        done.individual_id,
                        done.instances.len(),
                        per_individual
                    );
                }
                individuals.push(done);
            }
            if record.instance != 1 {
                bail!(
                    "{}: line {line_no}: individual {} must start at instance 1",
                    path.display(),
                    record.individual_id
                );
            }
            current = Some(IndividualHistory {
                individual_id: record.individual_id,
                instances: vec![instance],
            });
        }
    }
    if let Some(done) = current.take() {
        if done.instances.len() != per_individual {
            bail!(
                "{}: individual {} has {} instances (expected {})",
                path.display(),
                done.individual_id,
                done.instances.len(),
                per_individual
            );
        }
        individuals.push(done);
    }
    if individuals.len() != header.individuals {
        bail!(
            "{}: found {} individuals, header says {}",
            path.display(),
            individuals.len(),
            header.individuals
        );
    }

    Ok(ChoiceHistory {
        universe_size: header.universe_size,
        attribute_dim: header.attribute_dim,
        past_instances: header.past_instances,
        individuals,
    })
}

/// Write the oracle sidecar: one latent record per individual.
pub fn write_oracle(pop: &Population, config: &ScenarioConfig, path: &Path) -> Result<()> {
    let file = File::create(path)
        .with_context(|| format!("creating oracle sidecar {}", path.display()))?;
    let mut writer = BufWriter::new(file);
    for (n, set) in pop.consideration_sets.iter().enumerate() {
        let record = OracleRecord {
            individual_id: n as u64,
            consideration_set: set.clone(),
            beta_true: pop.beta_true.clone(),
            attribute_drift_sigma: config.attribute_drift_sigma,
            behavior_drift_delta: config.behavior_drift_delta,
            consideration_churn: config.consideration_churn,
        };
        serde_json::to_writer(&mut writer, &record)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_oracle(path: &Path) -> Result<Vec<OracleRecord>> {
    let file =
        File::open(path).with_context(|| format!("opening oracle sidecar {}", path.display()))?;
    let mut records = Vec::new();
    for (index, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: OracleRecord = serde_json::from_str(&line)
            .with_context(|| format!("{}: line {}: bad record", path.display(), index + 1))?;
        records.push(record);
    }
    Ok(records)
}

/// One dumped sufficient set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetRecord {
    pub individual_id: u64,
    pub protocol: String,
    pub members: Vec<u32>,
    pub counts: Vec<u32>,
    pub chosen_alt: u32,
    pub chosen_added: bool,
}

pub fn write_sets(sets: &[SufficientSet], path: &Path) -> Result<()> {
    let file =
        File::create(path).with_context(|| format!("creating set dump {}", path.display()))?;
    let mut writer = BufWriter::new(file);
    for set in sets {
        let record = SetRecord {
            individual_id: set.individual_id,
            protocol: set.protocol.label().into(),
            members: set.members.clone(),
            counts: set.counts.clone(),
            chosen_alt: set.chosen,
            chosen_added: set.chosen_added,
        };
        serde_json::to_writer(&mut writer, &record)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

/// Serialized estimation outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub beta_hat: Vec<f64>,
    pub loglik: f64,
    pub grad_inf_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Naive inverse-Hessian standard errors; absent when the Hessian is
    /// rank-deficient.
    pub se: Option<Vec<f64>>,
}

pub fn write_estimate(record: &EstimateRecord, path: &Path) -> Result<()> {
    let file = File::create(path)
        .with_context(|| format!("creating estimate record {}", path.display()))?;
    let mut writer = BufWriter::new(file);
    serde_json::to_writer(&mut writer, record)?;
    writer.write_all(b"\n")?;
    writer.flush()?;
    Ok(())
}

pub fn read_estimate(path: &Path) -> Result<EstimateRecord> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading estimate record {}", path.display()))?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use suffset_core::scenario::{build_population, simulate_history};

    fn scenario() -> ScenarioConfig {
        ScenarioConfig {
            individuals: 5,
            universe_size: 6,
            attribute_dim: 2,
            consideration_size: 3,
            past_instances: 3,
            beta_true: vec![0.5, -0.2],
            attribute_drift_sigma: 0.0,
            behavior_drift_delta: 0.0,
            consideration_churn: 0.0,
            cohort_size: 1,
            seed: 17,
        }
    }

    fn temp_path(name: &str) -> std::path::PathBuf {
        let mut path = std::env::temp_dir();
        path.push(format!(
            "suffset-dataset-test-{}-{name}",
            std::process::id()
        ));
        path
    }

    #[test]
    fn dataset_round_trips() {
        let config = scenario();
        let pop = build_population(&config).unwrap();
        let history = simulate_history(&pop, &config).unwrap();

        let path = temp_path("roundtrip.jsonl");
        write_dataset(&history, &path).unwrap();
        let back = read_dataset(&path).unwrap();
        assert_eq!(history, back);
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn missing_field_errors_name_the_field() {
        let path = temp_path("missing-field.jsonl");
        std::fs::write(
            &path,
            concat!(
                r#"{"schema_version":1,"individuals":1,"universe_size":1,"attribute_dim":1,"past_instances":0}"#,
                "\n",
                r#"{"individual_id":0,"instance":1,"attributes":[[0.0]]}"#,
                "\n"
            ),
        )
        .unwrap();
        let err = read_dataset(&path).unwrap_err();
        let text = format!("{err:#}");
        assert!(text.contains("chosen_alt"), "{text}");
        assert!(text.contains("line 2"), "{text}");
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn malformed_record_errors_carry_line_numbers() {
        let path = temp_path("malformed.jsonl");
        std::fs::write(
            &path,
            concat!(
                r#"{"schema_version":1,"individuals":1,"universe_size":1,"attribute_dim":1,"past_instances":0}"#,
                "\n",
                "not json\n"
            ),
        )
        .unwrap();
        let err = read_dataset(&path).unwrap_err();
        assert!(format!("{err:#}").contains("line 2"));
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn oracle_round_trips() {
        let config = scenario();
        let pop = build_population(&config).unwrap();
        let path = temp_path("oracle.jsonl");
        write_oracle(&pop, &config, &path).unwrap();
        let records = read_oracle(&path).unwrap();
        assert_eq!(records.len(), config.individuals);
        assert_eq!(records[2].consideration_set, pop.consideration_sets[2]);
        assert_eq!(records[0].beta_true, config.beta_true);
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn estimate_record_round_trips() {
        let record = EstimateRecord {
            beta_hat: vec![1.0, -0.5],
            loglik: -321.5,
            grad_inf_norm: 3e-8,
            iterations: 9,
            converged: true,
            se: Some(vec![0.05, 0.04]),
        };
        let path = temp_path("estimate.json");
        write_estimate(&record, &path).unwrap();
        assert_eq!(read_estimate(&path).unwrap(), record);
        std::fs::remove_file(&path).ok();
    }
}
