//! Maximum pseudo-likelihood estimation over sufficient sets with fixed
//! correction offsets.
//!
//! The objective is `Σ_n ln π(chosen_n | D_n; β)` with `π` the corrected
//! logit over each observation's set. Offsets are per-(observation,
//! alternative) constants; parameter-dependent offsets are rejected at
//! construction because they flatten the likelihood. With linear utilities
//! and fixed offsets the objective is concave, so Newton ascent with a
//! backtracking line search (and a gradient fallback when the Hessian
//! factorization fails) finds the global optimum.
//!
//! Sums over observations run in a fixed order, so results are reproducible
//! regardless of how callers schedule the surrounding work.

use alloc::vec;
use alloc::vec::Vec;

use crate::correction::CorrectionTerms;
use crate::error::{Error, Result};
use crate::math;
use crate::model::{dot, AltId, AttributeMatrix};

/// One estimation observation: the sufficient set's members, their attribute
/// rows at the modeled instance, the chosen member, and the correction
/// offsets.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    members: Vec<AltId>,
    attributes: AttributeMatrix,
    chosen_index: usize,
    offsets: Vec<f64>,
}

impl Observation {
    pub fn new(
        members: Vec<AltId>,
        attributes: AttributeMatrix,
        chosen: AltId,
        terms: &CorrectionTerms,
    ) -> Result<Self> {
        if terms.is_beta_dependent() {
            return Err(Error::BetaDependentCorrections);
        }
        if attributes.alternatives() != members.len() {
            return Err(Error::DimensionMismatch {
                what: "observation attribute rows",
                expected: members.len(),
                got: attributes.alternatives(),
            });
        }
        if terms.len() != members.len() {
            return Err(Error::DimensionMismatch {
                what: "observation offsets",
                expected: members.len(),
                got: terms.len(),
            });
        }
        let chosen_index =
            members
                .iter()
                .position(|&m| m == chosen)
                .ok_or(Error::InvalidInput {
                    what: "chosen alternative not among members",
                })?;
        Ok(Self {
            members,
            attributes,
            chosen_index,
            offsets: terms.values().to_vec(),
        })
    }

    pub fn members(&self) -> &[AltId] {
        &self.members
    }

    pub fn attributes(&self) -> &AttributeMatrix {
        &self.attributes
    }

    pub fn chosen_index(&self) -> usize {
        self.chosen_index
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// A batch of observations sharing one attribute dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimationProblem {
    observations: Vec<Observation>,
    dim: usize,
}

impl EstimationProblem {
    pub fn new(observations: Vec<Observation>) -> Result<Self> {
        let dim = observations
            .first()
            .map(|o| o.attributes.dim())
            .ok_or(Error::InvalidInput {
                what: "problem must have observations",
            })?;
        if let Some(bad) = observations.iter().find(|o| o.attributes.dim() != dim) {
            return Err(Error::DimensionMismatch {
                what: "observation attribute dimension",
                expected: dim,
                got: bad.attributes.dim(),
            });
        }
        Ok(Self { observations, dim })
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    /// Observations with a single member; they contribute nothing to the
    /// likelihood but are retained and counted.
    pub fn singleton_count(&self) -> usize {
        self.observations.iter().filter(|o| o.len() < 2).count()
    }

    fn is_identified(&self) -> bool {
        self.observations.iter().any(|o| o.len() >= 2)
    }

    fn validate_beta(&self, beta: &[f64]) -> Result<()> {
        if beta.len() != self.dim {
            return Err(Error::DimensionMismatch {
                what: "beta",
                expected: self.dim,
                got: beta.len(),
            });
        }
        if beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::NonFinite { what: "beta" });
        }
        Ok(())
    }
}

/// Dense symmetric matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.dim + col] = value;
    }

    fn add(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.dim + col] += value;
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn negated(&self) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|v| -v).collect(),
        }
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

/// Per-observation corrected probabilities at `beta`; scores are utilities
/// plus offsets, softmaxed with max-subtraction.
fn observation_probs(obs: &Observation, beta: &[f64], scores: &mut Vec<f64>) {
    scores.clear();
    for i in 0..obs.len() {
        scores.push(dot(obs.attributes.row(i), beta) + obs.offsets[i]);
    }
    let m = math::max(scores);
    let mut sum = 0.0;
    for s in scores.iter_mut() {
        *s = math::exp(*s - m);
        sum += *s;
    }
    for s in scores.iter_mut() {
        *s /= sum;
    }
}

fn loglik_unchecked(problem: &EstimationProblem, beta: &[f64]) -> f64 {
    let mut scores = Vec::new();
    let mut total = 0.0;
    for obs in &problem.observations {
        scores.clear();
        for i in 0..obs.len() {
            scores.push(dot(obs.attributes.row(i), beta) + obs.offsets[i]);
        }
        total += scores[obs.chosen_index] - math::log_sum_exp(&scores);
    }
    total
}

/// The pseudo-loglikelihood `Σ_n ln π(chosen_n | D_n; β)`.
pub fn pseudo_loglik(beta: &[f64], problem: &EstimationProblem) -> Result<f64> {
    problem.validate_beta(beta)?;
    Ok(loglik_unchecked(problem, beta))
}

fn gradient_unchecked(problem: &EstimationProblem, beta: &[f64]) -> Vec<f64> {
    let k = problem.dim;
    let mut grad = vec![0.0; k];
    let mut probs = Vec::new();
    for obs in &problem.observations {
        observation_probs(obs, beta, &mut probs);
        let chosen_row = obs.attributes.row(obs.chosen_index);
        for a in 0..k {
            grad[a] += chosen_row[a];
        }
        for (i, &p) in probs.iter().enumerate() {
            let row = obs.attributes.row(i);
            for a in 0..k {
                grad[a] -= p * row[a];
            }
        }
    }
    grad
}

/// Analytic gradient: `Σ_n (x_chosen - Σ_{j∈D_n} π_j x_j)`.
pub fn gradient(beta: &[f64], problem: &EstimationProblem) -> Result<Vec<f64>> {
    problem.validate_beta(beta)?;
    Ok(gradient_unchecked(problem, beta))
}

fn hessian_unchecked(problem: &EstimationProblem, beta: &[f64]) -> SquareMatrix {
    let k = problem.dim;
    let mut hess = SquareMatrix::zeros(k);
    let mut probs = Vec::new();
    let mut mean = vec![0.0; k];
    for obs in &problem.observations {
        observation_probs(obs, beta, &mut probs);
        mean.iter_mut().for_each(|m| *m = 0.0);
        for (i, &p) in probs.iter().enumerate() {
            let row = obs.attributes.row(i);
            for a in 0..k {
                mean[a] += p * row[a];
            }
        }
        for (i, &p) in probs.iter().enumerate() {
            let row = obs.attributes.row(i);
            for a in 0..k {
                let da = row[a] - mean[a];
                for b in a..k {
                    let db = row[b] - mean[b];
                    hess.add(a, b, -p * da * db);
                }
            }
        }
    }
    // Mirror the upper triangle.
    for a in 0..k {
        for b in 0..a {
            let v = hess.get(b, a);
            hess.set(a, b, v);
        }
    }
    hess
}

/// Analytic Hessian of the pseudo-loglikelihood; negative semidefinite
/// everywhere because the objective is concave.
pub fn hessian(beta: &[f64], problem: &EstimationProblem) -> Result<SquareMatrix> {
    problem.validate_beta(beta)?;
    Ok(hessian_unchecked(problem, beta))
}

mod linalg {
    use super::SquareMatrix;
    use crate::math;
    use alloc::vec;
    use alloc::vec::Vec;

    /// Lower Cholesky factor of a symmetric matrix, or `None` when a pivot
    /// falls below `1e-12` of the largest diagonal entry (treated as
    /// rank-deficient).
    pub fn cholesky(mat: &SquareMatrix) -> Option<Vec<f64>> {
        let n = mat.dim();
        let max_diag = (0..n).map(|i| mat.get(i, i)).fold(0.0f64, f64::max);
        if max_diag <= 0.0 {
            return None;
        }
        let tol = max_diag * 1e-12;
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = mat.get(i, j);
                for k in 0..j {
                    sum -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if sum <= tol {
                        return None;
                    }
                    l[i * n + i] = math::sqrt(sum);
                } else {
                    l[i * n + j] = sum / l[j * n + j];
                }
            }
        }
        Some(l)
    }

    /// Solve `L L' x = b` given the lower factor.
    pub fn cholesky_solve(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut sum = b[i];
            for k in 0..i {
                sum -= l[i * n + k] * y[k];
            }
            y[i] = sum / l[i * n + i];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut sum = y[i];
            for k in i + 1..n {
                sum -= l[k * n + i] * x[k];
            }
            x[i] = sum / l[i * n + i];
        }
        x
    }

    /// Inverse of `L L'` column by column, symmetrized.
    pub fn cholesky_inverse(l: &[f64], n: usize) -> SquareMatrix {
        let mut inv = SquareMatrix::zeros(n);
        let mut unit = vec![0.0; n];
        for col in 0..n {
            unit.iter_mut().for_each(|u| *u = 0.0);
            unit[col] = 1.0;
            let x = cholesky_solve(l, n, &unit);
            for (row, &v) in x.iter().enumerate() {
                inv.set(row, col, v);
            }
        }
        for a in 0..n {
            for b in 0..a {
                let v = 0.5 * (inv.get(a, b) + inv.get(b, a));
                inv.set(a, b, v);
                inv.set(b, a, v);
            }
        }
        inv
    }
}

/// Optimizer knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateOptions {
    /// Convergence threshold on the gradient infinity norm.
    pub grad_tol: f64,
    /// Maximum number of ascent steps.
    pub max_iter: usize,
    /// Trust bound on coefficients; crossing it signals separation.
    pub beta_bound: f64,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self {
            grad_tol: 1e-6,
            max_iter: 200,
            beta_bound: 50.0,
        }
    }
}

/// Outcome of an estimation run.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimationResult {
    pub beta_hat: Vec<f64>,
    pub loglik: f64,
    pub grad_inf_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Inverse negative Hessian at `beta_hat`, when requested.
    pub covariance: Option<SquareMatrix>,
}

const ARMIJO_C1: f64 = 1e-4;
const MIN_STEP: f64 = 1e-14;
// A pseudo-loglikelihood this close to zero means every non-singleton
// observation is predicted with probability 1 up to floating point: the
// supremum of an unbounded likelihood, i.e. separation.
const SATURATED_LOGLIK: f64 = -1e-8;

fn separation_error(beta: &[f64]) -> Error {
    let (coefficient, value) = beta
        .iter()
        .enumerate()
        .map(|(k, &v)| (k, v))
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .unwrap_or((0, 0.0));
    Error::Separation { coefficient, value }
}

/// Maximize the pseudo-loglikelihood by Newton ascent with an Armijo
/// backtracking line search. Falls back to the gradient direction whenever
/// the Hessian factorization fails. The objective is concave, so the
/// optimum reached is global.
///
/// Convergence requires both the gradient infinity norm below `grad_tol`
/// and a proposed step of negligible size. On separated data the gradient
/// decays while the proposed step stays large, so the iterates keep moving
/// until a coefficient crosses `beta_bound` and the separation error fires.
pub fn estimate(
    problem: &EstimationProblem,
    init: &[f64],
    opts: &EstimateOptions,
) -> Result<EstimationResult> {
    problem.validate_beta(init)?;
    if !problem.is_identified() {
        return Err(Error::NoIdentification);
    }
    if !(opts.grad_tol > 0.0 && opts.beta_bound > 0.0) {
        return Err(Error::InvalidConfig {
            reason: "grad_tol and beta_bound must be positive".into(),
        });
    }

    let mut beta = init.to_vec();
    let mut loglik = loglik_unchecked(problem, &beta);
    let mut iterations = 0;

    loop {
        let grad = gradient_unchecked(problem, &beta);
        let grad_norm = math::inf_norm(&grad);
        let gradient_ok = grad_norm <= opts.grad_tol;

        let neg_hessian = hessian_unchecked(problem, &beta).negated();
        let direction = match linalg::cholesky(&neg_hessian) {
            Some(l) => {
                let d = linalg::cholesky_solve(&l, problem.dim, &grad);
                // A Newton direction must ascend; fall back otherwise.
                if dot(&grad, &d) > 0.0 {
                    d
                } else {
                    grad.clone()
                }
            }
            None => grad.clone(),
        };
        let step_tol = opts.grad_tol * math::inf_norm(&beta).max(1.0);
        let step_small = math::inf_norm(&direction) <= step_tol;
        if gradient_ok && step_small {
            if loglik > SATURATED_LOGLIK {
                return Err(separation_error(&beta));
            }
            return Ok(EstimationResult {
                beta_hat: beta,
                loglik,
                grad_inf_norm: grad_norm,
                iterations,
                converged: true,
                covariance: None,
            });
        }
        if iterations >= opts.max_iter {
            if loglik > SATURATED_LOGLIK {
                return Err(separation_error(&beta));
            }
            return Ok(EstimationResult {
                beta_hat: beta,
                loglik,
                grad_inf_norm: grad_norm,
                iterations,
                converged: false,
                covariance: None,
            });
        }
        let slope = dot(&grad, &direction);

        let mut step = 1.0;
        let accepted = loop {
            let candidate: Vec<f64> = beta
                .iter()
                .zip(&direction)
                .map(|(b, d)| b + step * d)
                .collect();
            let candidate_ll = loglik_unchecked(problem, &candidate);
            // Strict improvement required: once gains fall below the
            // objective's floating-point resolution the search must stall
            // rather than wander on noise-level ties.
            if candidate_ll.is_finite()
                && candidate_ll > loglik
                && candidate_ll >= loglik + ARMIJO_C1 * step * slope
            {
                break Some((candidate, candidate_ll));
            }
            step *= 0.5;
            if step < MIN_STEP {
                break None;
            }
        };

        match accepted {
            Some((candidate, candidate_ll)) => {
                beta = candidate;
                loglik = candidate_ll;
                iterations += 1;
            }
            None => {
                // The line search stalled: the objective cannot resolve any
                // further improvement. With a satisfied gradient tolerance or
                // a negligible proposed step this is the optimum up to
                // floating-point resolution.
                if loglik > SATURATED_LOGLIK {
                    return Err(separation_error(&beta));
                }
                return Ok(EstimationResult {
                    beta_hat: beta,
                    loglik,
                    grad_inf_norm: grad_norm,
                    iterations,
                    converged: gradient_ok || step_small,
                    covariance: None,
                });
            }
        }

        for (k, &b) in beta.iter().enumerate() {
            if b.abs() > opts.beta_bound {
                return Err(Error::Separation {
                    coefficient: k,
                    value: b,
                });
            }
        }
    }
}

/// Covariance of the estimator at `beta_hat`: the inverse of the negative
/// Hessian. Symmetric positive semidefinite with nonnegative diagonal;
/// errors when the Hessian is singular.
pub fn covariance(beta_hat: &[f64], problem: &EstimationProblem) -> Result<SquareMatrix> {
    problem.validate_beta(beta_hat)?;
    let neg_hessian = hessian_unchecked(problem, beta_hat).negated();
    let l = linalg::cholesky(&neg_hessian).ok_or(Error::RankDeficient)?;
    Ok(linalg::cholesky_inverse(&l, problem.dim))
}
