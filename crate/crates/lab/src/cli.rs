//! Command-line interface: `generate`, `build-sets`, `estimate`,
//! `experiment`, and `compare`, all driven by one TOML config file.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use suffset_core::estimation::{covariance, estimate, EstimateOptions};
use suffset_core::scenario::{build_population, simulate_history};

use crate::config::{CompareConfig, ExperimentConfig};
use crate::dataset::{
    read_dataset, read_oracle, write_dataset, write_estimate, write_oracle, write_sets,
    EstimateRecord,
};
use crate::experiment::{assemble_problem, build_sets, compare_protocols, run_experiment};

pub const DATASET_FILE: &str = "dataset.jsonl";
pub const ORACLE_FILE: &str = "oracle.jsonl";
pub const SETS_FILE: &str = "sets.jsonl";
pub const ESTIMATE_FILE: &str = "estimate.json";
pub const METRICS_FILE: &str = "metrics.csv";
pub const COMPARE_FILE: &str = "compare.csv";

#[derive(Debug, Parser)]
#[command(
    name = "suffset",
    version,
    about = "Simulate logit choices with latent consideration sets and estimate on practical sets built from past choices"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Experiment config file (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Override the scenario seed from the config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output directory (default: current directory).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads for experiments (default: one per core).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a population and its choice history; write the public
    /// dataset and the oracle sidecar.
    Generate,
    /// Read the dataset and dump one sufficient set per individual under the
    /// configured protocol.
    BuildSets,
    /// Read the dataset, build sets, and estimate; report against the oracle
    /// sidecar when it is available.
    Estimate,
    /// Run the configured Monte Carlo experiment and write the metrics CSV.
    Experiment,
    /// Run several (protocol, correction) arms over a shared scenario and
    /// write one comparison CSV.
    Compare,
}

fn require_config(cli: &Cli) -> Result<PathBuf> {
    cli.config
        .clone()
        .ok_or_else(|| anyhow::anyhow!("--config <FILE> is required for this command"))
}

fn load_experiment_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::load(&require_config(cli)?)?;
    if let Some(seed) = cli.seed {
        config.scenario.seed = seed;
    }
    Ok(config)
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| PathBuf::from("."))
}

fn csv_path(cli: &Cli, config_path: &Option<PathBuf>, default_name: &str) -> PathBuf {
    match (&cli.out, config_path) {
        (Some(dir), _) => dir.join(default_name),
        (None, Some(path)) => path.clone(),
        (None, None) => PathBuf::from(default_name),
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    match cli.command {
        Command::Generate => generate(cli),
        Command::BuildSets => build_sets_command(cli),
        Command::Estimate => estimate_command(cli),
        Command::Experiment => experiment_command(cli),
        Command::Compare => compare_command(cli),
    }
}

fn generate(cli: &Cli) -> Result<()> {
    let config = load_experiment_config(cli)?;
    let scenario = config.scenario.to_core();
    let dir = out_dir(cli);
    std::fs::create_dir_all(&dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;

    let pop = build_population(&scenario).map_err(|e| anyhow::anyhow!("{e}"))?;
    let history = simulate_history(&pop, &scenario).map_err(|e| anyhow::anyhow!("{e}"))?;

    let dataset_path = dir.join(DATASET_FILE);
    let oracle_path = dir.join(ORACLE_FILE);
    write_dataset(&history, &dataset_path)?;
    write_oracle(&pop, &scenario, &oracle_path)?;
    println!(
        "wrote {} ({} individuals x {} instances) and {}",
        dataset_path.display(),
        scenario.individuals,
        scenario.past_instances + 1,
        oracle_path.display()
    );
    Ok(())
}

fn build_sets_command(cli: &Cli) -> Result<()> {
    let config = load_experiment_config(cli)?;
    let dir = out_dir(cli);
    let history = read_dataset(&dir.join(DATASET_FILE))?;
    let sets = build_sets(
        &history,
        &config.protocol,
        config.scenario.cohort_size,
        config.scenario.seed,
    )?;
    let path = dir.join(SETS_FILE);
    write_sets(&sets, &path)?;
    let mean_size =
        sets.iter().map(|s| s.members.len() as f64).sum::<f64>() / sets.len().max(1) as f64;
    println!(
        "wrote {} ({} sets, protocol {}, mean size {mean_size:.3})",
        path.display(),
        sets.len(),
        config.protocol.label()
    );
    Ok(())
}

fn estimate_command(cli: &Cli) -> Result<()> {
    let config = load_experiment_config(cli)?;
    let dir = out_dir(cli);
    let history = read_dataset(&dir.join(DATASET_FILE))?;
    let sets = build_sets(
        &history,
        &config.protocol,
        config.scenario.cohort_size,
        config.scenario.seed,
    )?;
    let problem = assemble_problem(&history, &sets, config.correction, &config.protocol)?;
    if problem.singleton_count() > 0 {
        println!(
            "note: {} singleton sets contribute nothing to the likelihood",
            problem.singleton_count()
        );
    }

    let init = vec![0.0; history.attribute_dim];
    let result = estimate(&problem, &init, &EstimateOptions::default())
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    let se = match covariance(&result.beta_hat, &problem) {
        Ok(cov) => Some(
            cov.diagonal()
                .iter()
                .map(|v| v.sqrt())
                .collect::<Vec<f64>>(),
        ),
        Err(e) => {
            println!("note: no standard errors ({e})");
            None
        }
    };

    let record = EstimateRecord {
        beta_hat: result.beta_hat.clone(),
        loglik: result.loglik,
        grad_inf_norm: result.grad_inf_norm,
        iterations: result.iterations,
        converged: result.converged,
        se,
    };
    let path = dir.join(ESTIMATE_FILE);
    write_estimate(&record, &path)?;

    println!("beta_hat: {:?}", record.beta_hat);
    println!(
        "loglik {:.6}, converged {} in {} iterations (grad inf norm {:.3e})",
        record.loglik, record.converged, record.iterations, record.grad_inf_norm
    );
    match read_oracle(&dir.join(ORACLE_FILE)) {
        Ok(records) if !records.is_empty() => {
            let beta_true = &records[0].beta_true;
            let bias: Vec<f64> = record
                .beta_hat
                .iter()
                .zip(beta_true)
                .map(|(hat, truth)| hat - truth)
                .collect();
            println!("oracle bias: {bias:?}");
        }
        _ => println!("oracle unavailable"),
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn experiment_command(cli: &Cli) -> Result<()> {
    let config = load_experiment_config(cli)?;
    let csv = csv_path(cli, &config.output_path, METRICS_FILE);
    if let Some(parent) = csv.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    let rows = run_experiment(&config, cli.threads, Some(&csv))?;
    println!("wrote {} ({} rows)", csv.display(), rows.len());
    Ok(())
}

fn compare_command(cli: &Cli) -> Result<()> {
    let path = require_config(cli)?;
    let mut compare = CompareConfig::load(&path)?;
    if let Some(seed) = cli.seed {
        for config in &mut compare.configs {
            config.scenario.seed = seed;
        }
    }
    if compare.configs.is_empty() {
        bail!("compare needs at least one config");
    }
    let csv = csv_path(cli, &compare.output_path, COMPARE_FILE);
    if let Some(parent) = csv.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    let rows = compare_protocols(&compare.configs, cli.threads, Some(&csv))?;
    println!("wrote {} ({} rows)", csv.display(), rows.len());
    Ok(())
}
