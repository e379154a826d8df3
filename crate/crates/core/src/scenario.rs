//! Synthetic populations with latent consideration sets and simulated
//! choice histories.
//!
//! Each individual owns a latent consideration set `C_n` drawn uniformly
//! among subsets of the universal alternative set, plus a base attribute
//! matrix over all alternatives. A history is `R` past choices followed by
//! one modeled choice; three drift knobs control how much the attributes,
//! the taste parameters, and the set itself vary across instances. With all
//! knobs at zero every instance shares the base context, so past choices are
//! draws with replacement whose selection probabilities equal the logit
//! choice probabilities.
//!
//! The drift knobs model violations an analyst cannot correct for, so all
//! three are latent: per-instance attribute variation shifts utilities at
//! choice time but the recorded snapshot keeps the base values, parameter
//! perturbations are never recorded, and instance-level set churn is never
//! recorded. Only the chosen alternatives and the base attribute snapshots
//! are observable.
//!
//! Generation is deterministic given the seed. Individual `n` draws from
//! substreams derived from `(seed, phase, n)`, so serial and parallel
//! generation agree exactly. Within an instance the draw order is fixed:
//! churn test, set resample, attribute noise (row-major over the instance's
//! consideration set), parameter perturbation, then the choice itself.

use alloc::sync::Arc;
use alloc::vec::Vec;
use rand_core::RngCore;

use crate::error::{Error, Result};
use crate::model::{gumbel_max_choice, AltId, AttributeMatrix, ChoiceContext, Parameters};
use crate::rng::{self, phase, sim_rng};

/// Scenario description: population dimensions, true parameters, drift
/// knobs, and the seed.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Number of individuals (N).
    pub individuals: usize,
    /// Size of the universal alternative set (J).
    pub universe_size: usize,
    /// Attribute dimension (K).
    pub attribute_dim: usize,
    /// Consideration-set size (J_n), shared by every individual.
    pub consideration_size: usize,
    /// Number of past instances (R); the history has R+1 instances in total.
    pub past_instances: usize,
    /// True taste parameters, length K.
    pub beta_true: Vec<f64>,
    /// Standard deviation of latent per-instance attribute variation; it
    /// moves utilities at choice time but never the recorded snapshot.
    pub attribute_drift_sigma: f64,
    /// Half-width of the latent per-instance uniform perturbation of beta.
    pub behavior_drift_delta: f64,
    /// Probability that an instance resamples its consideration set.
    pub consideration_churn: f64,
    /// Individuals per cohort; members of a cohort share base attributes and
    /// consideration set so inter-personal pooling is well defined.
    pub cohort_size: usize,
    /// Base seed for all generation.
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |reason: &str| {
            Err(Error::InvalidConfig {
                reason: reason.into(),
            })
        };
        if self.individuals == 0 {
            return fail("individuals must be positive");
        }
        if self.universe_size == 0 {
            return fail("universe_size must be positive");
        }
        if self.attribute_dim == 0 {
            return fail("attribute_dim must be positive");
        }
        if self.consideration_size == 0 || self.consideration_size > self.universe_size {
            return fail("consideration_size must lie in 1..=universe_size");
        }
        if self.beta_true.len() != self.attribute_dim {
            return fail("beta_true length must equal attribute_dim");
        }
        if self.beta_true.iter().any(|b| !b.is_finite()) {
            return fail("beta_true must be finite");
        }
        if !(self.attribute_drift_sigma.is_finite() && self.attribute_drift_sigma >= 0.0) {
            return fail("attribute_drift_sigma must be nonnegative");
        }
        if !(self.behavior_drift_delta.is_finite() && self.behavior_drift_delta >= 0.0) {
            return fail("behavior_drift_delta must be nonnegative");
        }
        if !(0.0..=1.0).contains(&self.consideration_churn) {
            return fail("consideration_churn must lie in [0, 1]");
        }
        if self.cohort_size == 0 {
            return fail("cohort_size must be positive");
        }
        Ok(())
    }
}

/// The latent side of a scenario: per-individual consideration sets, base
/// attributes over the universal set, and the true parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    /// Sorted consideration set of each individual.
    pub consideration_sets: Vec<Vec<AltId>>,
    /// Base J×K attribute matrix of each individual.
    pub base_attributes: Vec<Arc<AttributeMatrix>>,
    /// True taste parameters.
    pub beta_true: Vec<f64>,
}

/// One observed choice instance: the chosen alternative and the attribute
/// snapshot over the universal set as an analyst records it. Latent
/// per-instance variation is not part of the snapshot, so instances of one
/// individual share their base matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub chosen: AltId,
    pub attributes: Arc<AttributeMatrix>,
}

/// The R+1 instances of one individual, oldest first; the last instance is
/// the modeled choice.
#[derive(Debug, Clone, PartialEq)]
pub struct IndividualHistory {
    pub individual_id: u64,
    pub instances: Vec<Instance>,
}

impl IndividualHistory {
    /// The modeled (final) instance.
    pub fn modeled(&self) -> &Instance {
        self.instances
            .last()
            .expect("history has R+1 >= 1 instances")
    }

    /// The R past instances.
    pub fn past(&self) -> &[Instance] {
        &self.instances[..self.instances.len() - 1]
    }
}

/// Observable choice data for a whole population.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiceHistory {
    pub universe_size: usize,
    pub attribute_dim: usize,
    pub past_instances: usize,
    pub individuals: Vec<IndividualHistory>,
}

/// Draw a uniform size-`k` subset of `0..n` by partial Fisher-Yates;
/// returned sorted ascending.
fn uniform_subset<R: RngCore + ?Sized>(
    rng: &mut R,
    n: usize,
    k: usize,
    scratch: &mut Vec<AltId>,
) -> Vec<AltId> {
    scratch.clear();
    scratch.extend(0..n as AltId);
    for i in 0..k {
        let j = i + rng::uniform_index(rng, n - i);
        scratch.swap(i, j);
    }
    let mut out = scratch[..k].to_vec();
    out.sort_unstable();
    out
}

/// Build the latent population for a scenario. Consideration sets are drawn
/// uniformly among size-`consideration_size` subsets and base attributes iid
/// standard normal; cohort members replicate their leader's draw.
pub fn build_population(config: &ScenarioConfig) -> Result<Population> {
    config.validate()?;
    let j = config.universe_size;
    let k = config.attribute_dim;
    let mut consideration_sets: Vec<Vec<AltId>> = Vec::with_capacity(config.individuals);
    let mut base_attributes: Vec<Arc<AttributeMatrix>> = Vec::with_capacity(config.individuals);
    let mut scratch = Vec::new();

    for n in 0..config.individuals {
        if config.cohort_size > 1 && n % config.cohort_size != 0 {
            // Cohort followers share the leader's choice situation.
            let leader = n - (n % config.cohort_size);
            consideration_sets.push(consideration_sets[leader].clone());
            base_attributes.push(Arc::clone(&base_attributes[leader]));
            continue;
        }
        let mut rng = sim_rng(rng::substream_seed(
            config.seed,
            phase::POPULATION,
            n as u64,
        ));
        let set = uniform_subset(&mut rng, j, config.consideration_size, &mut scratch);
        let mut values = Vec::with_capacity(j * k);
        for _ in 0..j * k {
            values.push(rng::standard_normal(&mut rng));
        }
        consideration_sets.push(set);
        base_attributes.push(Arc::new(AttributeMatrix::new(j, k, values)?));
    }

    Ok(Population {
        consideration_sets,
        base_attributes,
        beta_true: config.beta_true.clone(),
    })
}

/// Simulate the R+1 choice instances of every individual.
pub fn simulate_history(pop: &Population, config: &ScenarioConfig) -> Result<ChoiceHistory> {
    config.validate()?;
    if pop.consideration_sets.len() != config.individuals
        || pop.base_attributes.len() != config.individuals
    {
        return Err(Error::InvalidConfig {
            reason: "population size does not match the scenario".into(),
        });
    }

    let mut individuals = Vec::with_capacity(config.individuals);
    for n in 0..config.individuals {
        individuals.push(simulate_individual(pop, config, n)?);
    }

    Ok(ChoiceHistory {
        universe_size: config.universe_size,
        attribute_dim: config.attribute_dim,
        past_instances: config.past_instances,
        individuals,
    })
}

fn simulate_individual(
    pop: &Population,
    config: &ScenarioConfig,
    n: usize,
) -> Result<IndividualHistory> {
    let mut rng = sim_rng(rng::substream_seed(config.seed, phase::HISTORY, n as u64));
    let base_set = &pop.consideration_sets[n];
    let base_attrs = &pop.base_attributes[n];
    let j = config.universe_size;
    let k = config.attribute_dim;

    let mut scratch = Vec::new();
    let mut instances = Vec::with_capacity(config.past_instances + 1);
    for _ in 0..=config.past_instances {
        // Instance consideration set.
        let churned = config.consideration_churn > 0.0
            && rng::uniform_open01(&mut rng) < config.consideration_churn;
        let set: Vec<AltId> = if churned {
            uniform_subset(&mut rng, j, config.consideration_size, &mut scratch)
        } else {
            base_set.clone()
        };

        // Latent attribute variation: the chooser reacts to perturbed
        // values, the recorded snapshot keeps the base matrix.
        let mut rows: Vec<f64> = set
            .iter()
            .flat_map(|&id| base_attrs.row(id as usize).iter().copied())
            .collect();
        if config.attribute_drift_sigma > 0.0 {
            for value in &mut rows {
                *value += config.attribute_drift_sigma * rng::standard_normal(&mut rng);
            }
        }

        // Latent instance taste parameters.
        let beta: Vec<f64> = if config.behavior_drift_delta > 0.0 {
            pop.beta_true
                .iter()
                .map(|&b| {
                    b + config.behavior_drift_delta * (2.0 * rng::uniform_open01(&mut rng) - 1.0)
                })
                .collect()
        } else {
            pop.beta_true.clone()
        };
        let params = Parameters::new(beta)?;

        // The choice itself, over the instance's consideration set.
        let ctx = ChoiceContext::new(set.clone(), AttributeMatrix::new(set.len(), k, rows)?)?;
        let local = gumbel_max_choice(&ctx, &params, &mut rng)?;
        instances.push(Instance {
            chosen: set[local],
            attributes: Arc::clone(base_attrs),
        });
    }

    Ok(IndividualHistory {
        individual_id: n as u64,
        instances,
    })
}
