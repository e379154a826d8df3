//! Random-utility logit primitives.
//!
//! Utility is linear in the parameters, `V = β'x`, and the error terms are
//! iid Extreme Value I, so choice probabilities over a consideration set are
//! the logit kernel. The scale is fixed at 1 in every estimation path; it is
//! not identifiable alongside β.

use alloc::vec::Vec;
use rand_core::RngCore;

use crate::error::{Error, Result};
use crate::math;
use crate::rng;

/// Alternative identifier within a scenario's universal set.
pub type AltId = u32;

/// Taste parameters: K coefficients and the (fixed) logit scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Parameters {
    beta: Vec<f64>,
    mu: f64,
}

impl Parameters {
    /// Parameters with the scale normalized to 1.
    pub fn new(beta: Vec<f64>) -> Result<Self> {
        Self::with_scale(beta, 1.0)
    }

    /// Parameters with an explicit positive scale. Only simulation paths may
    /// use a scale other than 1.
    pub fn with_scale(beta: Vec<f64>, mu: f64) -> Result<Self> {
        if beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::NonFinite { what: "beta" });
        }
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::InvalidInput {
                what: "scale must be finite and positive",
            });
        }
        Ok(Self { beta, mu })
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn scale(&self) -> f64 {
        self.mu
    }

    pub fn dim(&self) -> usize {
        self.beta.len()
    }
}

/// Dense row-major matrix of alternative attributes: one row of length
/// `dim` per alternative. Entries are validated finite on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeMatrix {
    alternatives: usize,
    dim: usize,
    values: Vec<f64>,
}

impl AttributeMatrix {
    pub fn new(alternatives: usize, dim: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != alternatives * dim {
            return Err(Error::DimensionMismatch {
                what: "attribute matrix",
                expected: alternatives * dim,
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "attributes" });
        }
        Ok(Self {
            alternatives,
            dim,
            values,
        })
    }

    /// Attribute row of one alternative.
    pub fn row(&self, alternative: usize) -> &[f64] {
        let start = alternative * self.dim;
        &self.values[start..start + self.dim]
    }

    pub fn alternatives(&self) -> usize {
        self.alternatives
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// A choice situation: the alternatives an individual selects among and one
/// attribute row per alternative.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiceContext {
    ids: Vec<AltId>,
    attributes: AttributeMatrix,
}

impl ChoiceContext {
    pub fn new(ids: Vec<AltId>, attributes: AttributeMatrix) -> Result<Self> {
        if ids.is_empty() {
            return Err(Error::InvalidInput {
                what: "choice context must be nonempty",
            });
        }
        if attributes.alternatives() != ids.len() {
            return Err(Error::DimensionMismatch {
                what: "context attribute rows",
                expected: ids.len(),
                got: attributes.alternatives(),
            });
        }
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput {
                what: "alternative identifiers must be unique",
            });
        }
        Ok(Self { ids, attributes })
    }

    pub fn ids(&self) -> &[AltId] {
        &self.ids
    }

    pub fn attributes(&self) -> &AttributeMatrix {
        &self.attributes
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Position of an alternative id within the context, if present.
    pub fn position(&self, id: AltId) -> Option<usize> {
        self.ids.iter().position(|&x| x == id)
    }
}

/// Systematic utility `V = Σ_k β_k x_k`.
pub fn systematic_utility(attributes: &[f64], params: &Parameters) -> Result<f64> {
    if attributes.len() != params.dim() {
        return Err(Error::DimensionMismatch {
            what: "attribute vector",
            expected: params.dim(),
            got: attributes.len(),
        });
    }
    Ok(dot(attributes, params.beta()))
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Systematic utilities for every alternative in a context.
pub fn utilities(ctx: &ChoiceContext, params: &Parameters) -> Result<Vec<f64>> {
    (0..ctx.len())
        .map(|i| systematic_utility(ctx.attributes().row(i), params))
        .collect()
}

/// Logit choice probabilities over the context, `P(i) = e^{μV_i} / Σ_j e^{μV_j}`,
/// computed with max-subtraction. Entries sum to 1 within 1e-12.
pub fn choice_probabilities(ctx: &ChoiceContext, params: &Parameters) -> Result<Vec<f64>> {
    let v = utilities(ctx, params)?;
    let scaled: Vec<f64> = v.iter().map(|&u| params.scale() * u).collect();
    if scaled.iter().any(|u| !u.is_finite()) {
        return Err(Error::NonFinite { what: "utilities" });
    }
    Ok(math::stable_softmax(&scaled))
}

/// Validate a probability vector: finite, nonnegative, sums to 1 within
/// `1e-9`.
fn validate_probabilities(probs: &[f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::InvalidInput {
            what: "probability vector must be nonempty",
        });
    }
    if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::InvalidInput {
            what: "probabilities must be finite and nonnegative",
        });
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput {
            what: "probabilities must sum to 1",
        });
    }
    Ok(())
}

/// Inverse-CDF draw from a validated probability vector. Consumes exactly
/// one uniform, so the result is deterministic given the generator state.
pub fn sample_choice<R: RngCore + ?Sized>(probs: &[f64], rng: &mut R) -> Result<usize> {
    validate_probabilities(probs)?;
    Ok(sample_index_unchecked(probs, rng))
}

/// Inverse-CDF walk without validation; rounding in the cumulative sum is
/// absorbed by the final index.
pub(crate) fn sample_index_unchecked<R: RngCore + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u = rng::uniform_open01(rng);
    let mut cum = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        cum += p;
        if u < cum {
            return i;
        }
    }
    probs.len() - 1
}

/// Simulate one choice by drawing iid Extreme Value I errors (location 0,
/// scale μ) and returning `argmax(V_i + ε_i)`. Distributionally equal to
/// [`sample_choice`] over [`choice_probabilities`].
pub fn gumbel_max_choice<R: RngCore + ?Sized>(
    ctx: &ChoiceContext,
    params: &Parameters,
    rng: &mut R,
) -> Result<usize> {
    let v = utilities(ctx, params)?;
    if v.iter().any(|u| !u.is_finite()) {
        return Err(Error::NonFinite { what: "utilities" });
    }
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, &vi) in v.iter().enumerate() {
        let eps = rng::standard_gumbel(rng) / params.scale();
        let total = vi + eps;
        if total > best_val {
            best_val = total;
            best = i;
        }
    }
    Ok(best)
}
