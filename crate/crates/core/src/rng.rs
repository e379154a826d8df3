//! Seeded random number generation with pinned transforms.
//!
//! Every stochastic routine in the crate draws through the functions defined
//! here, so a run is reproducible bit-for-bit given a seed. The transforms
//! are fixed by contract:
//!
//! * uniform (0, 1): the top 52 bits of a `u64`, offset by half an ulp —
//!   `((x >> 12) + 0.5) * 2^-52` — so neither endpoint can occur;
//! * standard normal: Marsaglia's polar method (one variate per call, the
//!   paired variate is discarded);
//! * standard Extreme Value I: `-ln(-ln(u))` with `u` uniform in (0, 1).
//!
//! Independent substreams are derived from a base seed and a `(phase,
//! index)` pair with SplitMix64, so individuals and replications can be
//! processed in parallel without sharing generator state.

use rand_core::RngCore;

use crate::math;

/// Generator used throughout the crate.
pub type SimRng = rand_chacha::ChaCha8Rng;

/// Stream labels for substream derivation. Callers that need their own
/// phases should pick values well above the reserved ones.
pub mod phase {
    /// Population construction (consideration sets, base attributes).
    pub const POPULATION: u64 = 1;
    /// Choice history simulation.
    pub const HISTORY: u64 = 2;
    /// Per-replication scenario seeds in Monte Carlo experiments.
    pub const REPLICATION: u64 = 3;
    /// Set-building protocols that draw alternatives at estimation time.
    pub const SET_SAMPLING: u64 = 4;
}

/// Build the crate generator from a 64-bit seed.
pub fn sim_rng(seed: u64) -> SimRng {
    use rand_core::SeedableRng;
    SimRng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the seed of an independent substream from `(seed, phase, index)`.
///
/// The derivation chains SplitMix64 over the three inputs; distinct
/// `(phase, index)` pairs yield unrelated streams, and serial and parallel
/// traversals of the index space agree exactly.
pub fn substream_seed(seed: u64, phase: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ phase) ^ index)
}

/// Uniform draw in the open interval (0, 1). Consumes one `u64`.
pub fn uniform_open01<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    const SCALE: f64 = 1.0 / (1u64 << 52) as f64;
    ((rng.next_u64() >> 12) as f64 + 0.5) * SCALE
}

/// Standard normal draw via the polar method. Consumes a variable number of
/// `u64`s (two per proposal, 4/π expected proposals).
pub fn standard_normal<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u = 2.0 * uniform_open01(rng) - 1.0;
        let v = 2.0 * uniform_open01(rng) - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            return u * math::sqrt(-2.0 * math::ln(s) / s);
        }
    }
}

/// Standard Extreme Value I draw (location 0, scale 1): `-ln(-ln(u))`.
pub fn standard_gumbel<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    -math::ln(-math::ln(uniform_open01(rng)))
}

/// Uniform index in `[0, n)` by Lemire's multiply-shift rejection; unbiased
/// for every `n > 0`.
pub fn uniform_index<R: RngCore + ?Sized>(rng: &mut R, n: usize) -> usize {
    debug_assert!(n > 0);
    let n = n as u64;
    let zone = n.wrapping_neg() % n; // 2^64 mod n
    loop {
        let m = u128::from(rng.next_u64()) * u128::from(n);
        if (m as u64) >= zone {
            return (m >> 64) as usize;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substreams_are_deterministic_and_distinct() {
        let a = substream_seed(7, phase::POPULATION, 0);
        let b = substream_seed(7, phase::POPULATION, 1);
        let c = substream_seed(7, phase::HISTORY, 0);
        assert_eq!(a, substream_seed(7, phase::POPULATION, 0));
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_ne!(b, c);
    }

    #[test]
    fn uniform_stays_inside_open_interval() {
        let mut rng = sim_rng(1);
        for _ in 0..10_000 {
            let u = uniform_open01(&mut rng);
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn uniform_index_covers_range_uniformly() {
        let mut rng = sim_rng(2);
        let n = 7;
        let mut counts = [0u32; 7];
        let draws = 70_000;
        for _ in 0..draws {
            counts[uniform_index(&mut rng, n)] += 1;
        }
        // ±5 sd band around the expected 10_000 per cell.
        let sd = (draws as f64 * (1.0 / 7.0) * (6.0 / 7.0)).sqrt();
        for &c in &counts {
            assert!((f64::from(c) - 10_000.0).abs() < 5.0 * sd, "count {c}");
        }
    }

    #[test]
    fn normal_moments_are_plausible() {
        let mut rng = sim_rng(3);
        let n = 200_000;
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in 0..n {
            let z = standard_normal(&mut rng);
            sum += z;
            sum_sq += z * z;
        }
        let mean = sum / n as f64;
        let var = sum_sq / n as f64 - mean * mean;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }

    #[test]
    fn gumbel_moments_match_euler_mascheroni() {
        let mut rng = sim_rng(4);
        let n = 200_000;
        let mut sum = 0.0;
        for _ in 0..n {
            sum += standard_gumbel(&mut rng);
        }
        let mean = sum / n as f64;
        // E[G] = γ ≈ 0.5772, sd = π/√6 ≈ 1.2825.
        assert!((mean - 0.577_215_664_901_532_9).abs() < 0.01, "mean {mean}");
    }
}
