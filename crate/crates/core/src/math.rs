//! Scalar math shims and overflow-safe softmax helpers.
//!
//! With `std` enabled the shims call the standard library; without it they
//! route through `libm` so the crate stays `no_std` compatible.

use alloc::vec::Vec;

#[cfg(feature = "std")]
#[inline(always)]
pub fn exp(x: f64) -> f64 {
    x.exp()
}

#[cfg(feature = "std")]
#[inline(always)]
pub fn ln(x: f64) -> f64 {
    x.ln()
}

#[cfg(feature = "std")]
#[inline(always)]
pub fn sqrt(x: f64) -> f64 {
    x.sqrt()
}

#[cfg(not(feature = "std"))]
#[inline(always)]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[cfg(not(feature = "std"))]
#[inline(always)]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[cfg(not(feature = "std"))]
#[inline(always)]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

/// Largest entry of a nonempty slice under total ordering.
pub fn max(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// ln Σ exp(v_i), computed with max-subtraction so inputs beyond ±700 are
/// still safe.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let m = max(values);
    if !m.is_finite() {
        return m;
    }
    let sum: f64 = values.iter().map(|&v| exp(v - m)).sum();
    m + ln(sum)
}

/// exp(v_i) / Σ exp(v_j) with max-subtraction. Entries are strictly positive
/// and sum to 1 up to rounding for finite inputs.
pub fn stable_softmax(values: &[f64]) -> Vec<f64> {
    let m = max(values);
    let mut out: Vec<f64> = values.iter().map(|&v| exp(v - m)).collect();
    let sum: f64 = out.iter().sum();
    for p in &mut out {
        *p /= sum;
    }
    out
}

/// Infinity norm of a vector.
pub fn inf_norm(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |acc, &v| acc.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmax_handles_large_utilities() {
        let p = stable_softmax(&[1000.0, 1000.0]);
        assert!((p[0] - 0.5).abs() < 1e-15);
        assert!((p[1] - 0.5).abs() < 1e-15);

        let p = stable_softmax(&[-1000.0, 0.0]);
        assert!(p[0] >= 0.0 && p[1] <= 1.0);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn log_sum_exp_matches_direct_evaluation() {
        let v = [0.3f64, -1.2, 2.0];
        let direct = (v[0].exp() + v[1].exp() + v[2].exp()).ln();
        assert!((log_sum_exp(&v) - direct).abs() < 1e-14);
    }
}
