//! Practical estimation sets assembled from choice histories or drawn by a
//! sampling protocol.
//!
//! Four protocols are supported: past purchase history (PPH), inter-personal
//! pooling over a cohort (IP), classic uniform random sampling of nonchosen
//! alternatives, and importance sampling with replacement. Members are kept
//! sorted ascending by alternative id so downstream likelihoods are
//! deterministic.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use rand_core::RngCore;

use crate::error::{Error, Result};
use crate::model::{self, AltId, ChoiceContext};
use crate::rng;
use crate::scenario::IndividualHistory;

/// How a sufficient set was constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    /// Distinct alternatives chosen in the individual's own history.
    Pph,
    /// Union of alternatives chosen by a cohort facing the same situation.
    Ip,
    /// Chosen alternative plus a uniform sample of nonchosen ones.
    RandomSample,
    /// Iid draws with replacement from a known importance distribution.
    ImportanceSample,
}

impl Protocol {
    /// Stable lowercase label used in dumps and reports.
    pub fn label(self) -> &'static str {
        match self {
            Protocol::Pph => "pph",
            Protocol::Ip => "ip",
            Protocol::RandomSample => "random_sample",
            Protocol::ImportanceSample => "importance_sample",
        }
    }
}

/// A practical estimation set for one individual: the member alternatives,
/// how often each was chosen (or drawn), and the modeled chosen alternative.
#[derive(Debug, Clone, PartialEq)]
pub struct SufficientSet {
    pub individual_id: u64,
    /// Member alternative ids, ascending.
    pub members: Vec<AltId>,
    /// Choice or draw counts, parallel to `members`.
    pub counts: Vec<u32>,
    /// The modeled chosen alternative; always a member.
    pub chosen: AltId,
    /// True when the chosen alternative was absent from the past draws and
    /// had to be added.
    pub chosen_added: bool,
    pub protocol: Protocol,
}

impl SufficientSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Position of the chosen alternative within `members`.
    pub fn chosen_index(&self) -> usize {
        self.members
            .binary_search(&self.chosen)
            .expect("chosen is a member by construction")
    }
}

fn from_count_map(
    individual_id: u64,
    counts: BTreeMap<AltId, u32>,
    chosen: AltId,
    chosen_added: bool,
    protocol: Protocol,
) -> SufficientSet {
    let members: Vec<AltId> = counts.keys().copied().collect();
    let counts: Vec<u32> = counts.values().copied().collect();
    SufficientSet {
        individual_id,
        members,
        counts,
        chosen,
        chosen_added,
        protocol,
    }
}

/// Past-purchase-history set: the distinct alternatives chosen across the
/// individual's R past instances, plus the modeled chosen alternative if it
/// never appeared. Counts span all R+1 instances, so they sum to R+1.
pub fn build_pph(history: &IndividualHistory) -> SufficientSet {
    let chosen = history.modeled().chosen;
    let mut counts: BTreeMap<AltId, u32> = BTreeMap::new();
    for inst in &history.instances {
        *counts.entry(inst.chosen).or_insert(0) += 1;
    }
    let chosen_added = !history.past().iter().any(|inst| inst.chosen == chosen);
    from_count_map(
        history.individual_id,
        counts,
        chosen,
        chosen_added,
        Protocol::Pph,
    )
}

/// Inter-personal set: choices pooled across a cohort whose members face the
/// same choice situation. The cohort must share the modeled-instance
/// attribute snapshot; pooling across differing situations is an error.
pub fn build_ip(cohort: &[IndividualHistory], target: usize) -> Result<SufficientSet> {
    if cohort.is_empty() {
        return Err(Error::InvalidInput {
            what: "cohort must be nonempty",
        });
    }
    if target >= cohort.len() {
        return Err(Error::InvalidInput {
            what: "target must be a cohort member",
        });
    }
    let reference = &cohort[target].modeled().attributes;
    for member in cohort {
        let attrs = &member.modeled().attributes;
        if !alloc::sync::Arc::ptr_eq(attrs, reference) && attrs.values() != reference.values() {
            return Err(Error::InvalidInput {
                what: "cohort members must share the same base attributes",
            });
        }
    }

    let target_history = &cohort[target];
    let chosen = target_history.modeled().chosen;
    let mut counts: BTreeMap<AltId, u32> = BTreeMap::new();
    let mut seen_elsewhere = false;
    for (i, member) in cohort.iter().enumerate() {
        for (r, inst) in member.instances.iter().enumerate() {
            *counts.entry(inst.chosen).or_insert(0) += 1;
            let is_target_modeled = i == target && r == member.instances.len() - 1;
            if !is_target_modeled && inst.chosen == chosen {
                seen_elsewhere = true;
            }
        }
    }
    Ok(from_count_map(
        target_history.individual_id,
        counts,
        chosen,
        !seen_elsewhere,
        Protocol::Ip,
    ))
}

/// Classic sampling of alternatives: keep the chosen alternative and draw
/// `sample_size - 1` of the nonchosen ones uniformly without replacement.
/// Counts are all 1 and unused by this protocol.
pub fn build_random_sample<R: RngCore + ?Sized>(
    individual_id: u64,
    ctx: &ChoiceContext,
    chosen: AltId,
    sample_size: usize,
    rng: &mut R,
) -> Result<SufficientSet> {
    let j = ctx.len();
    if sample_size == 0 || sample_size > j {
        return Err(Error::InvalidInput {
            what: "sample_size must lie in 1..=context size",
        });
    }
    if ctx.position(chosen).is_none() {
        return Err(Error::InvalidInput {
            what: "chosen alternative not in context",
        });
    }

    // Partial Fisher-Yates over the nonchosen ids.
    let mut pool: Vec<AltId> = ctx
        .ids()
        .iter()
        .copied()
        .filter(|&id| id != chosen)
        .collect();
    let mut members = Vec::with_capacity(sample_size);
    members.push(chosen);
    for i in 0..sample_size - 1 {
        let k = i + rng::uniform_index(rng, pool.len() - i);
        pool.swap(i, k);
        members.push(pool[i]);
    }
    members.sort_unstable();

    Ok(SufficientSet {
        individual_id,
        counts: alloc::vec![1; members.len()],
        members,
        chosen,
        chosen_added: true,
        protocol: Protocol::RandomSample,
    })
}

/// Importance sampling with replacement: `draws` iid draws with selection
/// probabilities `q` (indexed like the context), plus the chosen alternative
/// if it was never drawn. The chosen alternative's count is incremented by
/// one so counts cover R+1 instances and sum to `draws + 1`.
pub fn build_importance_sample<R: RngCore + ?Sized>(
    individual_id: u64,
    ctx: &ChoiceContext,
    chosen: AltId,
    draws: usize,
    q: &[f64],
    rng: &mut R,
) -> Result<SufficientSet> {
    if q.len() != ctx.len() {
        return Err(Error::DimensionMismatch {
            what: "importance probabilities",
            expected: ctx.len(),
            got: q.len(),
        });
    }
    if q.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::InvalidInput {
            what: "importance probabilities must be finite and nonnegative",
        });
    }
    if (q.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput {
            what: "importance probabilities must sum to 1",
        });
    }
    if ctx.position(chosen).is_none() {
        return Err(Error::InvalidInput {
            what: "chosen alternative not in context",
        });
    }

    let mut counts: BTreeMap<AltId, u32> = BTreeMap::new();
    for _ in 0..draws {
        let idx = model::sample_index_unchecked(q, rng);
        *counts.entry(ctx.ids()[idx]).or_insert(0) += 1;
    }
    let chosen_added = !counts.contains_key(&chosen);
    *counts.entry(chosen).or_insert(0) += 1;

    Ok(from_count_map(
        individual_id,
        counts,
        chosen,
        chosen_added,
        Protocol::ImportanceSample,
    ))
}
