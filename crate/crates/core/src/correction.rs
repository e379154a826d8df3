//! Per-alternative sampling-correction offsets and the corrected choice
//! probabilities they induce.
//!
//! A sampling protocol that conditions on the chosen alternative requires a
//! per-alternative offset — the log conditional probability of drawing the
//! realized set given each hypothetical chosen member — added to the
//! systematic utilities before the softmax. Offsets are defined only up to a
//! common additive constant, because the softmax cancels it; every provider
//! here returns the alternative-varying part and drops all constants.
//!
//! When the offsets are equal across members (the uniform conditioning
//! property) the correction cancels entirely and uncorrected estimation on
//! the reduced set is consistent.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::model::{choice_probabilities, ChoiceContext, Parameters};
use crate::sets::SufficientSet;

/// Default tolerance for [`is_uniform_conditioning`] on exact protocols.
pub const DEFAULT_UNIFORM_TOL: f64 = 1e-9;

/// Which correction to apply to a sufficient set.
#[derive(Debug, Clone, Copy)]
pub enum CorrectionSpec<'a> {
    /// No correction; offsets are identically zero.
    None,
    /// A protocol satisfying the uniform conditioning property (for example
    /// uniform random sampling of nonchosen alternatives): the offset is a
    /// constant, so the varying part is zero.
    UniformConditioning,
    /// Importance sampling with known selection probabilities, indexed by
    /// alternative id: offset `ln(n_j / q_j)`.
    KnownImportance(&'a [f64]),
    /// The importance correction with the empirical frequency `n_j/(R+1)`
    /// plugged in for the selection probability. The offset collapses to
    /// `ln(R+1)`, a constant, so the varying part is zero — using past-choice
    /// sets without correction is exactly this estimator.
    EmpiricalFrequency,
    /// The exact correction computed from the latent consideration set and
    /// the true parameters: offset `ln n_j - ln P(j | C_n, β)`. Depends on β,
    /// so it is evaluation-only; the estimator rejects it.
    OracleExact {
        /// Context over the true consideration set at the modeled instance.
        context: &'a ChoiceContext,
        /// Parameters generating the choice probabilities.
        params: &'a Parameters,
    },
}

/// Per-member correction offsets, defined up to an additive constant.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionTerms {
    values: Vec<f64>,
    beta_dependent: bool,
}

impl CorrectionTerms {
    /// Fixed (parameter-free) offsets supplied directly.
    pub fn fixed(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "correction terms",
            });
        }
        Ok(Self {
            values,
            beta_dependent: false,
        })
    }

    /// All-zero offsets of the given length.
    pub fn zeros(len: usize) -> Self {
        Self {
            values: vec![0.0; len],
            beta_dependent: false,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// True when the offsets were computed from the parameters being
    /// estimated; such terms are for evaluation only.
    pub fn is_beta_dependent(&self) -> bool {
        self.beta_dependent
    }

    /// `max_j c_j - min_j c_j`; zero means the correction cancels exactly.
    pub fn spread(&self) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        let max = self
            .values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let min = self.values.iter().copied().fold(f64::INFINITY, f64::min);
        max - min
    }

    /// The same terms shifted by a constant; probabilities are unchanged.
    pub fn shifted(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v + c).collect(),
            beta_dependent: self.beta_dependent,
        }
    }
}

fn require_positive_counts(set: &SufficientSet) -> Result<()> {
    if set.counts.contains(&0) {
        return Err(Error::InvalidInput {
            what: "counting protocols require a positive count for every member",
        });
    }
    Ok(())
}

/// Compute the correction offsets of a sufficient set under a spec. Only the
/// alternative-varying part is returned; all member-constant factors are
/// dropped by contract.
pub fn correction_terms(spec: &CorrectionSpec<'_>, set: &SufficientSet) -> Result<CorrectionTerms> {
    match spec {
        CorrectionSpec::None | CorrectionSpec::UniformConditioning => {
            Ok(CorrectionTerms::zeros(set.len()))
        }
        CorrectionSpec::EmpiricalFrequency => {
            require_positive_counts(set)?;
            // ln n_j - ln(n_j / (R+1)) = ln(R+1) for every member.
            Ok(CorrectionTerms::zeros(set.len()))
        }
        CorrectionSpec::KnownImportance(q) => {
            require_positive_counts(set)?;
            let mut values = Vec::with_capacity(set.len());
            for (&member, &count) in set.members.iter().zip(&set.counts) {
                let qj = q.get(member as usize).copied().ok_or(Error::InvalidInput {
                    what: "importance probabilities must cover every member",
                })?;
                if !(qj.is_finite() && qj > 0.0) {
                    return Err(Error::InvalidInput {
                        what: "importance probability of a member must be positive",
                    });
                }
                values.push(math::ln(f64::from(count) / qj));
            }
            Ok(CorrectionTerms {
                values,
                beta_dependent: false,
            })
        }
        CorrectionSpec::OracleExact { context, params } => {
            require_positive_counts(set)?;
            let probs = choice_probabilities(context, params)?;
            let mut values = Vec::with_capacity(set.len());
            for (&member, &count) in set.members.iter().zip(&set.counts) {
                let pos = context.position(member).ok_or(Error::InvalidInput {
                    what: "member outside the oracle consideration set",
                })?;
                values.push(math::ln(f64::from(count)) - math::ln(probs[pos]));
            }
            Ok(CorrectionTerms {
                values,
                beta_dependent: true,
            })
        }
    }
}

/// Corrected choice probabilities over a sufficient set:
/// `π(i|D) = exp(V_i + c_i) / Σ_j exp(V_j + c_j)`, overflow-safe.
pub fn corrected_probabilities(utilities: &[f64], terms: &CorrectionTerms) -> Result<Vec<f64>> {
    if utilities.len() != terms.len() {
        return Err(Error::DimensionMismatch {
            what: "corrected probabilities",
            expected: terms.len(),
            got: utilities.len(),
        });
    }
    if utilities.is_empty() {
        return Err(Error::InvalidInput {
            what: "utilities must be nonempty",
        });
    }
    if utilities.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "utilities" });
    }
    let scores: Vec<f64> = utilities
        .iter()
        .zip(terms.values())
        .map(|(v, c)| v + c)
        .collect();
    Ok(math::stable_softmax(&scores))
}

/// True when the offsets are equal across members within `tol`, so the
/// correction cancels in the softmax.
pub fn is_uniform_conditioning(terms: &CorrectionTerms, tol: f64) -> bool {
    terms.spread() <= tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AltId, AttributeMatrix};
    use crate::rng::{sim_rng, standard_normal, uniform_index};
    use crate::sets::Protocol;
    use approx::assert_abs_diff_eq;

    fn set_with_counts(members: Vec<AltId>, counts: Vec<u32>, chosen: AltId) -> SufficientSet {
        SufficientSet {
            individual_id: 0,
            members,
            counts,
            chosen,
            chosen_added: false,
            protocol: Protocol::ImportanceSample,
        }
    }

    #[test]
    fn none_gives_zeros() {
        let set = set_with_counts(vec![0, 1, 5], vec![3, 1, 2], 0);
        let terms = correction_terms(&CorrectionSpec::None, &set).unwrap();
        assert_eq!(terms.values(), &[0.0, 0.0, 0.0]);
        assert!(is_uniform_conditioning(&terms, DEFAULT_UNIFORM_TOL));
    }

    #[test]
    fn known_importance_is_log_count_over_q() {
        let set = set_with_counts(vec![0, 1], vec![3, 1], 0);
        let q = [0.5, 0.5];
        let terms = correction_terms(&CorrectionSpec::KnownImportance(&q), &set).unwrap();
        assert_abs_diff_eq!(terms.values()[0], 6.0f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(terms.values()[1], 2.0f64.ln(), epsilon = 1e-15);
        assert!(!is_uniform_conditioning(&terms, DEFAULT_UNIFORM_TOL));
    }

    #[test]
    fn known_importance_rejects_zero_probability_members() {
        let set = set_with_counts(vec![0, 1], vec![3, 1], 0);
        let q = [1.0, 0.0];
        assert!(correction_terms(&CorrectionSpec::KnownImportance(&q), &set).is_err());
    }

    #[test]
    fn counting_protocols_reject_zero_counts() {
        let set = set_with_counts(vec![0, 1], vec![3, 0], 0);
        assert!(correction_terms(&CorrectionSpec::EmpiricalFrequency, &set).is_err());
        let q = [0.5, 0.5];
        assert!(correction_terms(&CorrectionSpec::KnownImportance(&q), &set).is_err());
    }

    #[test]
    fn empirical_frequency_normalizes_to_zero() {
        let set = set_with_counts(vec![2, 4, 7], vec![5, 2, 1], 2);
        let terms = correction_terms(&CorrectionSpec::EmpiricalFrequency, &set).unwrap();
        assert_eq!(terms.values(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn oracle_exact_matches_hand_value() {
        // C = {a, b} with equal utilities so P = (0.5, 0.5); counts (3, 1)
        // give offsets (ln 6, ln 2).
        let ctx = ChoiceContext::new(
            vec![0, 1],
            AttributeMatrix::new(2, 1, vec![1.0, 1.0]).unwrap(),
        )
        .unwrap();
        let params = Parameters::new(vec![0.7]).unwrap();
        let set = set_with_counts(vec![0, 1], vec![3, 1], 0);
        let terms = correction_terms(
            &CorrectionSpec::OracleExact {
                context: &ctx,
                params: &params,
            },
            &set,
        )
        .unwrap();
        assert!(terms.is_beta_dependent());
        assert_abs_diff_eq!(terms.values()[0], 6.0f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(terms.values()[1], 2.0f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn zero_corrections_reduce_to_plain_logit() {
        let v = [0.4, -1.0, 2.2];
        let probs = corrected_probabilities(&v, &CorrectionTerms::zeros(3)).unwrap();
        let direct = crate::math::stable_softmax(&v);
        assert_eq!(probs, direct);
    }

    #[test]
    fn shifting_terms_leaves_probabilities_unchanged() {
        let v = [0.4, -1.0, 2.2];
        let terms = CorrectionTerms::fixed(vec![0.3, -0.7, 1.1]).unwrap();
        let base = corrected_probabilities(&v, &terms).unwrap();
        for c in [-10.0, -1.3, 4.9, 10.0] {
            let shifted = corrected_probabilities(&v, &terms.shifted(c)).unwrap();
            for (a, b) in base.iter().zip(&shifted) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-12 * a.abs().max(1e-300));
            }
        }
    }

    #[test]
    fn oracle_exact_probabilities_degenerate_to_count_shares() {
        // With offsets built from the same (C_n, β) that generated the
        // utilities, π(i|D) = n_i / Σ n_j regardless of β.
        let mut rng = sim_rng(31);
        for _ in 0..100 {
            let j_n = 2 + uniform_index(&mut rng, 5);
            let k = 1 + uniform_index(&mut rng, 3);
            let values: Vec<f64> = (0..j_n * k).map(|_| standard_normal(&mut rng)).collect();
            let ctx = ChoiceContext::new(
                (0..j_n as AltId).collect(),
                AttributeMatrix::new(j_n, k, values).unwrap(),
            )
            .unwrap();
            let beta: Vec<f64> = (0..k).map(|_| 2.0 * standard_normal(&mut rng)).collect();
            let params = Parameters::new(beta).unwrap();

            // Random counts over a random subset containing the chosen.
            let member_count = 1 + uniform_index(&mut rng, j_n);
            let members: Vec<AltId> = (0..member_count as AltId).collect();
            let counts: Vec<u32> = (0..member_count)
                .map(|_| 1 + uniform_index(&mut rng, 6) as u32)
                .collect();
            let set = set_with_counts(members.clone(), counts.clone(), 0);

            let terms = correction_terms(
                &CorrectionSpec::OracleExact {
                    context: &ctx,
                    params: &params,
                },
                &set,
            )
            .unwrap();
            let utilities: Vec<f64> = members
                .iter()
                .map(|&m| {
                    crate::model::systematic_utility(ctx.attributes().row(m as usize), &params)
                        .unwrap()
                })
                .collect();
            let probs = corrected_probabilities(&utilities, &terms).unwrap();
            let total: f64 = counts.iter().map(|&c| f64::from(c)).sum();
            for (p, &c) in probs.iter().zip(&counts) {
                assert!(
                    (p - f64::from(c) / total).abs() < 1e-10,
                    "p {p} share {}",
                    f64::from(c) / total
                );
            }
        }
    }

    #[test]
    fn uniform_conditioning_detector() {
        assert!(is_uniform_conditioning(
            &CorrectionTerms::zeros(4),
            DEFAULT_UNIFORM_TOL
        ));
        let constant = CorrectionTerms::fixed(vec![1.7, 1.7, 1.7]).unwrap();
        assert!(is_uniform_conditioning(&constant, DEFAULT_UNIFORM_TOL));
        let varying = CorrectionTerms::fixed(vec![6.0f64.ln(), 2.0f64.ln()]).unwrap();
        assert!(!is_uniform_conditioning(&varying, DEFAULT_UNIFORM_TOL));
    }
}
