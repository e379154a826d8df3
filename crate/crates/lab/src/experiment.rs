//! Monte Carlo harness: replicated generate → build sets → correct →
//! estimate pipelines, aggregated into bias/RMSE tables.
//!
//! Determinism: replication `r` at sweep point `i` derives its scenario seed
//! from `(seed, REPLICATION, i << 32 | r)`, so a rerun with the same config
//! reproduces every record, arms of a comparison see identical datasets, and
//! parallel and serial execution produce byte-identical reports. Records are
//! collected in job order and aggregated by a sequential fold.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use suffset_core::correction::{correction_terms, CorrectionSpec};
use suffset_core::estimation::{estimate, EstimateOptions, EstimationProblem, Observation};
use suffset_core::math::stable_softmax;
use suffset_core::model::{AltId, AttributeMatrix, ChoiceContext};
use suffset_core::rng::{phase, sim_rng, substream_seed};
use suffset_core::scenario::{
    build_population, simulate_history, ChoiceHistory, Instance, ScenarioConfig,
};
use suffset_core::sets::{
    build_importance_sample, build_ip, build_pph, build_random_sample, SufficientSet,
};

use crate::config::{CompareConfig, CorrectionKind, ExperimentConfig, ProtocolSpec, SweepSpec};

/// Outcome of one replication.
#[derive(Debug, Clone, PartialEq)]
pub enum ReplicationOutcome {
    Estimated {
        beta_hat: Vec<f64>,
        loglik: f64,
        iterations: usize,
        converged: bool,
        mean_set_size: f64,
    },
    /// The pipeline failed (for example no identification or separation);
    /// recorded, never fatal to the batch.
    Failed { reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationRecord {
    pub sweep_index: usize,
    pub replication: usize,
    pub outcome: ReplicationOutcome,
}

/// One aggregated report row, one per (sweep value, coefficient).
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub sweep_value: f64,
    pub coef_index: usize,
    pub bias: f64,
    pub rmse: f64,
    pub mc_se: f64,
    pub mean_set_size: f64,
    pub converged_share: f64,
}

/// One comparison row, one per (protocol, correction, coefficient).
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub protocol: String,
    pub correction: String,
    pub coef_index: usize,
    pub bias: f64,
    pub rmse: f64,
    pub mc_se: f64,
    pub mean_set_size: f64,
    pub converged_share: f64,
}

/// The concrete scenarios of a sweep, with the value reported per point.
fn sweep_points(config: &ExperimentConfig) -> Vec<(f64, ScenarioConfig)> {
    let base = config.scenario.to_core();
    match &config.sweep {
        None => vec![(base.past_instances as f64, base)],
        Some(SweepSpec::PastInstances(values)) => values
            .iter()
            .map(|&r| {
                let mut scenario = base.clone();
                scenario.past_instances = r;
                (r as f64, scenario)
            })
            .collect(),
        Some(SweepSpec::AttributeDriftSigma(values)) => values
            .iter()
            .map(|&sigma| {
                let mut scenario = base.clone();
                scenario.attribute_drift_sigma = sigma;
                (sigma, scenario)
            })
            .collect(),
    }
}

/// Universal-set choice context at one instance.
fn universal_context(instance: &Instance, universe_size: usize) -> ChoiceContext {
    ChoiceContext::new(
        (0..universe_size as AltId).collect(),
        (*instance.attributes).clone(),
    )
    .expect("universal context is valid by construction")
}

/// Importance distribution `q_j ∝ exp(z_j)` over the universal set, with `z`
/// the designated attribute column at the modeled instance.
fn importance_q(instance: &Instance, universe_size: usize, skew_attribute: usize) -> Vec<f64> {
    let z: Vec<f64> = (0..universe_size)
        .map(|alt| instance.attributes.row(alt)[skew_attribute])
        .collect();
    stable_softmax(&z)
}

/// Build one sufficient set per individual under the configured protocol.
/// Sampling protocols derive per-individual generator substreams from
/// `(seed, SET_SAMPLING, individual)`.
pub fn build_sets(
    history: &ChoiceHistory,
    protocol: &ProtocolSpec,
    cohort_size: usize,
    seed: u64,
) -> Result<Vec<SufficientSet>> {
    let mut sets = Vec::with_capacity(history.individuals.len());
    match protocol {
        ProtocolSpec::Pph => {
            for individual in &history.individuals {
                sets.push(build_pph(individual));
            }
        }
        ProtocolSpec::Ip => {
            for chunk in history.individuals.chunks(cohort_size.max(1)) {
                for target in 0..chunk.len() {
                    sets.push(build_ip(chunk, target).map_err(|e| anyhow::anyhow!("{e}"))?);
                }
            }
        }
        ProtocolSpec::RandomSample { sample_size } => {
            for individual in &history.individuals {
                let modeled = individual.modeled();
                let ctx = universal_context(modeled, history.universe_size);
                let mut rng = sim_rng(substream_seed(
                    seed,
                    phase::SET_SAMPLING,
                    individual.individual_id,
                ));
                sets.push(
                    build_random_sample(
                        individual.individual_id,
                        &ctx,
                        modeled.chosen,
                        *sample_size,
                        &mut rng,
                    )
                    .map_err(|e| anyhow::anyhow!("{e}"))?,
                );
            }
        }
        ProtocolSpec::ImportanceSample {
            draws,
            skew_attribute,
        } => {
            for individual in &history.individuals {
                let modeled = individual.modeled();
                let ctx = universal_context(modeled, history.universe_size);
                let q = importance_q(modeled, history.universe_size, *skew_attribute);
                let mut rng = sim_rng(substream_seed(
                    seed,
                    phase::SET_SAMPLING,
                    individual.individual_id,
                ));
                sets.push(
                    build_importance_sample(
                        individual.individual_id,
                        &ctx,
                        modeled.chosen,
                        *draws,
                        &q,
                        &mut rng,
                    )
                    .map_err(|e| anyhow::anyhow!("{e}"))?,
                );
            }
        }
    }
    Ok(sets)
}

/// Assemble the estimation problem: per individual, the set's attribute rows
/// at the modeled instance plus the configured correction offsets.
pub fn assemble_problem(
    history: &ChoiceHistory,
    sets: &[SufficientSet],
    correction: CorrectionKind,
    protocol: &ProtocolSpec,
) -> Result<EstimationProblem> {
    if history.individuals.len() != sets.len() {
        bail!("one sufficient set per individual is required");
    }
    let mut observations = Vec::with_capacity(sets.len());
    for (individual, set) in history.individuals.iter().zip(sets) {
        let modeled = individual.modeled();
        let q = matches!(correction, CorrectionKind::KnownImportance).then(|| {
            let ProtocolSpec::ImportanceSample { skew_attribute, .. } = protocol else {
                unreachable!("validated pairing");
            };
            importance_q(modeled, history.universe_size, *skew_attribute)
        });
        let spec = match correction {
            CorrectionKind::None => CorrectionSpec::None,
            CorrectionKind::UniformConditioning => CorrectionSpec::UniformConditioning,
            CorrectionKind::EmpiricalFrequency => CorrectionSpec::EmpiricalFrequency,
            CorrectionKind::KnownImportance => {
                CorrectionSpec::KnownImportance(q.as_deref().unwrap())
            }
            CorrectionKind::OracleExact => {
                bail!("the oracle_exact correction is evaluation-only")
            }
        };
        let terms = correction_terms(&spec, set).map_err(|e| anyhow::anyhow!("{e}"))?;

        let rows: Vec<f64> = set
            .members
            .iter()
            .flat_map(|&m| modeled.attributes.row(m as usize).iter().copied())
            .collect();
        let attributes = AttributeMatrix::new(set.members.len(), history.attribute_dim, rows)
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        observations.push(
            Observation::new(set.members.clone(), attributes, set.chosen, &terms)
                .map_err(|e| anyhow::anyhow!("{e}"))?,
        );
    }
    EstimationProblem::new(observations).map_err(|e| anyhow::anyhow!("{e}"))
}

/// Run one seeded replication: generate, build sets, correct, estimate.
pub fn run_replication(
    config: &ExperimentConfig,
    sweep_index: usize,
    replication: usize,
) -> ReplicationRecord {
    let points = sweep_points(config);
    let (_, mut scenario) = points[sweep_index].clone();
    scenario.seed = substream_seed(
        config.scenario.seed,
        phase::REPLICATION,
        ((sweep_index as u64) << 32) | replication as u64,
    );

    let outcome = replication_outcome(config, &scenario);
    ReplicationRecord {
        sweep_index,
        replication,
        outcome,
    }
}

fn replication_outcome(config: &ExperimentConfig, scenario: &ScenarioConfig) -> ReplicationOutcome {
    let run = || -> Result<ReplicationOutcome> {
        let pop = build_population(scenario).map_err(|e| anyhow::anyhow!("{e}"))?;
        let history = simulate_history(&pop, scenario).map_err(|e| anyhow::anyhow!("{e}"))?;
        let sets = build_sets(
            &history,
            &config.protocol,
            scenario.cohort_size,
            scenario.seed,
        )?;
        let mean_set_size =
            sets.iter().map(|s| s.members.len() as f64).sum::<f64>() / sets.len() as f64;
        let problem = assemble_problem(&history, &sets, config.correction, &config.protocol)?;
        let init = vec![0.0; scenario.attribute_dim];
        let result = estimate(&problem, &init, &EstimateOptions::default())
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        Ok(ReplicationOutcome::Estimated {
            beta_hat: result.beta_hat,
            loglik: result.loglik,
            iterations: result.iterations,
            converged: result.converged,
            mean_set_size,
        })
    };
    match run() {
        Ok(outcome) => outcome,
        Err(e) => ReplicationOutcome::Failed {
            reason: format!("{e:#}"),
        },
    }
}

struct PointAggregate {
    bias: Vec<f64>,
    rmse: Vec<f64>,
    mc_se: Vec<f64>,
    mean_set_size: f64,
    converged_share: f64,
}

/// Aggregate converged replications into bias/RMSE/SE per coefficient.
/// Points with no converged replication are flagged with NaN metrics.
fn aggregate(
    outcomes: &[&ReplicationOutcome],
    beta_true: &[f64],
    replications: usize,
) -> PointAggregate {
    let k = beta_true.len();
    let estimates: Vec<(&Vec<f64>, f64)> = outcomes
        .iter()
        .filter_map(|o| match o {
            ReplicationOutcome::Estimated {
                beta_hat,
                converged: true,
                mean_set_size,
                ..
            } => Some((beta_hat, *mean_set_size)),
            _ => None,
        })
        .collect();
    let m = estimates.len();
    let converged_share = m as f64 / replications as f64;
    if m == 0 {
        return PointAggregate {
            bias: vec![f64::NAN; k],
            rmse: vec![f64::NAN; k],
            mc_se: vec![f64::NAN; k],
            mean_set_size: f64::NAN,
            converged_share,
        };
    }

    let mut bias = vec![0.0; k];
    let mut rmse = vec![0.0; k];
    let mut mc_se = vec![0.0; k];
    for coef in 0..k {
        let errors: Vec<f64> = estimates
            .iter()
            .map(|(b, _)| b[coef] - beta_true[coef])
            .collect();
        let mean_err = errors.iter().sum::<f64>() / m as f64;
        bias[coef] = mean_err;
        rmse[coef] = (errors.iter().map(|e| e * e).sum::<f64>() / m as f64).sqrt();
        if m > 1 {
            let var = errors.iter().map(|e| (e - mean_err).powi(2)).sum::<f64>() / (m - 1) as f64;
            mc_se[coef] = (var / m as f64).sqrt();
        }
    }
    let mean_set_size = estimates.iter().map(|(_, s)| s).sum::<f64>() / m as f64;
    PointAggregate {
        bias,
        rmse,
        mc_se,
        mean_set_size,
        converged_share,
    }
}

fn with_pool<T: Send>(threads: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(job()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .context("building thread pool")?;
            Ok(pool.install(job))
        }
    }
}

/// Run a full experiment: every replication at every sweep point, aggregated
/// into [`MetricsRow`]s ordered by (sweep_value, coef_index). Writes the CSV
/// report when `csv_out` is given.
pub fn run_experiment(
    config: &ExperimentConfig,
    threads: Option<usize>,
    csv_out: Option<&Path>,
) -> Result<Vec<MetricsRow>> {
    config.validate()?;
    let points = sweep_points(config);
    let jobs: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|i| (0..config.replications).map(move |r| (i, r)))
        .collect();

    let records: Vec<ReplicationRecord> = with_pool(threads, || {
        jobs.par_iter()
            .map(|&(i, r)| run_replication(config, i, r))
            .collect()
    })?;

    let beta_true = &config.scenario.beta_true;
    let mut rows = Vec::new();
    for (i, (value, _)) in points.iter().enumerate() {
        let outcomes: Vec<&ReplicationOutcome> = records
            .iter()
            .filter(|rec| rec.sweep_index == i)
            .map(|rec| &rec.outcome)
            .collect();
        let agg = aggregate(&outcomes, beta_true, config.replications);
        for coef in 0..beta_true.len() {
            rows.push(MetricsRow {
                sweep_value: *value,
                coef_index: coef,
                bias: agg.bias[coef],
                rmse: agg.rmse[coef],
                mc_se: agg.mc_se[coef],
                mean_set_size: agg.mean_set_size,
                converged_share: agg.converged_share,
            });
        }
    }
    rows.sort_by(|a, b| {
        a.sweep_value
            .total_cmp(&b.sweep_value)
            .then(a.coef_index.cmp(&b.coef_index))
    });

    if let Some(path) = csv_out {
        std::fs::write(path, metrics_csv(&rows))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(rows)
}

/// Run one experiment per (protocol, correction) arm over a shared scenario
/// and collect a single comparison table. Arms reuse identical per-
/// replication datasets because seeds derive from the shared scenario seed.
pub fn compare_protocols(
    configs: &[ExperimentConfig],
    threads: Option<usize>,
    csv_out: Option<&Path>,
) -> Result<Vec<CompareRow>> {
    CompareConfig {
        configs: configs.to_vec(),
        output_path: None,
    }
    .validate()?;

    let mut rows = Vec::new();
    for config in configs {
        let metrics = run_experiment(config, threads, None)?;
        for row in metrics {
            rows.push(CompareRow {
                protocol: config.protocol.label(),
                correction: config.correction.label().into(),
                coef_index: row.coef_index,
                bias: row.bias,
                rmse: row.rmse,
                mc_se: row.mc_se,
                mean_set_size: row.mean_set_size,
                converged_share: row.converged_share,
            });
        }
    }

    if let Some(path) = csv_out {
        std::fs::write(path, compare_csv(&rows))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(rows)
}

/// Fixed-column CSV for experiment reports.
pub fn metrics_csv(rows: &[MetricsRow]) -> String {
    let mut out =
        String::from("sweep_value,coef_index,bias,rmse,mc_se,mean_set_size,converged_share\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.sweep_value,
            r.coef_index,
            r.bias,
            r.rmse,
            r.mc_se,
            r.mean_set_size,
            r.converged_share
        )
        .expect("writing to a String cannot fail");
    }
    out
}

/// Fixed-column CSV for protocol comparisons.
pub fn compare_csv(rows: &[CompareRow]) -> String {
    let mut out = String::from(
        "protocol,correction,coef_index,bias,rmse,mc_se,mean_set_size,converged_share\n",
    );
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.protocol,
            r.correction,
            r.coef_index,
            r.bias,
            r.rmse,
            r.mc_se,
            r.mean_set_size,
            r.converged_share
        )
        .expect("writing to a String cannot fail");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ScenarioSection;

    fn base_config() -> ExperimentConfig {
        ExperimentConfig {
            scenario: ScenarioSection {
                individuals: 60,
                universe_size: 8,
                attribute_dim: 2,
                consideration_size: 8,
                past_instances: 6,
                beta_true: vec![0.8, -0.5],
                attribute_drift_sigma: 0.0,
                behavior_drift_delta: 0.0,
                consideration_churn: 0.0,
                cohort_size: 1,
                seed: 404,
            },
            protocol: ProtocolSpec::Pph,
            correction: CorrectionKind::None,
            replications: 3,
            sweep: None,
            output_path: None,
        }
    }

    #[test]
    fn replications_are_deterministic() {
        let config = base_config();
        let a = run_replication(&config, 0, 1);
        let b = run_replication(&config, 0, 1);
        assert_eq!(a, b);
        let c = run_replication(&config, 0, 2);
        assert_ne!(a, c);
    }

    #[test]
    fn full_random_sample_equals_full_set_estimate() {
        // sample_size = J with no correction must reproduce the full-set
        // estimate bit for bit.
        let mut config = base_config();
        config.protocol = ProtocolSpec::RandomSample { sample_size: 8 };
        let full_sample = run_replication(&config, 0, 0);

        let scenario = {
            let mut s = config.scenario.to_core();
            s.seed = substream_seed(config.scenario.seed, phase::REPLICATION, 0);
            s
        };
        let pop = build_population(&scenario).unwrap();
        let history = simulate_history(&pop, &scenario).unwrap();
        let contexts: Vec<SufficientSet> = history
            .individuals
            .iter()
            .map(|ind| SufficientSet {
                individual_id: ind.individual_id,
                members: (0..8).collect(),
                counts: vec![1; 8],
                chosen: ind.modeled().chosen,
                chosen_added: true,
                protocol: suffset_core::sets::Protocol::RandomSample,
            })
            .collect();
        let problem =
            assemble_problem(&history, &contexts, CorrectionKind::None, &config.protocol).unwrap();
        let full = estimate(&problem, &[0.0, 0.0], &EstimateOptions::default()).unwrap();

        match full_sample.outcome {
            ReplicationOutcome::Estimated { beta_hat, .. } => {
                assert_eq!(beta_hat, full.beta_hat);
            }
            ReplicationOutcome::Failed { reason } => panic!("failed: {reason}"),
        }
    }

    #[test]
    fn pph_with_no_past_records_no_identification() {
        let mut config = base_config();
        config.scenario.past_instances = 0;
        let record = run_replication(&config, 0, 0);
        match record.outcome {
            ReplicationOutcome::Failed { reason } => {
                assert!(reason.contains("no identification"), "{reason}");
            }
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn failures_do_not_abort_the_batch() {
        // R = 0 makes every set a singleton; the experiment still aggregates.
        let mut config = base_config();
        config.scenario.past_instances = 0;
        let rows = run_experiment(&config, None, None).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].converged_share, 0.0);
        assert!(rows[0].bias.is_nan());
    }

    #[test]
    fn single_replication_rmse_equals_abs_bias() {
        let mut config = base_config();
        config.replications = 1;
        let rows = run_experiment(&config, None, None).unwrap();
        for row in rows {
            assert!((row.rmse - row.bias.abs()).abs() < 1e-15);
            assert_eq!(row.converged_share, 1.0);
        }
    }

    #[test]
    fn serial_and_parallel_reports_are_identical() {
        let mut config = base_config();
        config.sweep = Some(SweepSpec::PastInstances(vec![2, 6]));
        let serial = run_experiment(&config, Some(1), None).unwrap();
        let parallel = run_experiment(&config, Some(4), None).unwrap();
        assert_eq!(metrics_csv(&serial), metrics_csv(&parallel));
    }

    #[test]
    fn empirical_frequency_matches_none_exactly() {
        // Both corrections produce zero offsets, so the estimates agree bit
        // for bit.
        let none = run_experiment(&base_config(), None, None).unwrap();
        let mut config = base_config();
        config.correction = CorrectionKind::EmpiricalFrequency;
        let empirical = run_experiment(&config, None, None).unwrap();
        for (a, b) in none.iter().zip(&empirical) {
            assert_eq!(a.bias, b.bias);
            assert_eq!(a.rmse, b.rmse);
        }
    }

    #[test]
    fn compare_emits_one_row_block_per_arm() {
        let mut arm2 = base_config();
        arm2.correction = CorrectionKind::EmpiricalFrequency;
        let rows = compare_protocols(&[base_config(), arm2], None, None).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].protocol, "pph");
        assert_eq!(rows[0].correction, "none");
        assert_eq!(rows[2].correction, "empirical_frequency");
        // Paired seeds: identical datasets and zero offsets on both arms.
        assert_eq!(rows[0].bias, rows[2].bias);
    }

    #[test]
    fn rmse_dominates_bias() {
        let mut config = base_config();
        config.replications = 8;
        let rows = run_experiment(&config, None, None).unwrap();
        for row in rows {
            assert!(row.rmse >= row.bias.abs() - 1e-12);
        }
    }

    #[test]
    fn ip_protocol_pools_cohorts() {
        let mut config = base_config();
        config.scenario.cohort_size = 5;
        config.protocol = ProtocolSpec::Ip;
        let record = run_replication(&config, 0, 0);
        match record.outcome {
            ReplicationOutcome::Estimated {
                mean_set_size,
                converged,
                ..
            } => {
                assert!(converged);
                // Pooled sets are larger than an individual's own support.
                assert!(mean_set_size > 1.0);
            }
            ReplicationOutcome::Failed { reason } => panic!("failed: {reason}"),
        }
    }

    #[test]
    fn pph_sets_stay_inside_the_latent_set_without_churn() {
        let mut config = base_config();
        config.scenario.consideration_size = 4;
        config.scenario.past_instances = 12;
        let scenario = config.scenario.to_core();
        let pop = build_population(&scenario).unwrap();
        let history = simulate_history(&pop, &scenario).unwrap();
        let sets = build_sets(&history, &ProtocolSpec::Pph, 1, scenario.seed).unwrap();
        for (n, set) in sets.iter().enumerate() {
            for member in &set.members {
                assert!(
                    pop.consideration_sets[n].contains(member),
                    "individual {n}: member {member} outside the latent set"
                );
            }
        }
    }

    #[test]
    fn uncorrected_importance_sampling_has_the_largest_bias() {
        // Skewed q: uniform random sampling and corrected importance
        // sampling are near-unbiased, dropping the importance correction is
        // not.
        let scenario = ScenarioSection {
            individuals: 600,
            universe_size: 15,
            attribute_dim: 2,
            consideration_size: 15,
            past_instances: 0,
            beta_true: vec![1.0, -0.5],
            attribute_drift_sigma: 0.0,
            behavior_drift_delta: 0.0,
            consideration_churn: 0.0,
            cohort_size: 1,
            seed: 9090,
        };
        let importance = ProtocolSpec::ImportanceSample {
            draws: 8,
            skew_attribute: 0,
        };
        let arms = [
            ExperimentConfig {
                scenario: scenario.clone(),
                protocol: ProtocolSpec::RandomSample { sample_size: 6 },
                correction: CorrectionKind::None,
                replications: 10,
                sweep: None,
                output_path: None,
            },
            ExperimentConfig {
                scenario: scenario.clone(),
                protocol: importance.clone(),
                correction: CorrectionKind::None,
                replications: 10,
                sweep: None,
                output_path: None,
            },
            ExperimentConfig {
                scenario,
                protocol: importance,
                correction: CorrectionKind::KnownImportance,
                replications: 10,
                sweep: None,
                output_path: None,
            },
        ];
        let rows = compare_protocols(&arms, None, None).unwrap();
        // Skewed coefficient, one row block of 2 per arm.
        let random_bias = rows[0].bias.abs();
        let uncorrected_bias = rows[2].bias.abs();
        let corrected_bias = rows[4].bias.abs();
        assert!(
            uncorrected_bias > random_bias && uncorrected_bias > corrected_bias,
            "bias ordering violated: random {random_bias:.4}, \
             uncorrected {uncorrected_bias:.4}, corrected {corrected_bias:.4}"
        );

        // A single config degenerates to one row block.
        let single = compare_protocols(&arms[..1], None, None).unwrap();
        assert_eq!(single.len(), 2);
    }
}
