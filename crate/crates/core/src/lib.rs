//! Core primitives for studying discrete choice estimation on practical
//! choice sets assembled from observed past choices.
//!
//! The crate covers the full in-memory pipeline:
//!
//! * [`model`] — random-utility logit kernel: systematic utilities, choice
//!   probabilities, and stochastic choice simulation.
//! * [`scenario`] — synthetic populations with latent consideration sets and
//!   simulated choice histories, with controllable drift in attributes,
//!   behavior, and set membership.
//! * [`sets`] — construction of practical estimation sets from histories:
//!   past-purchase-history, inter-personal pooling, classic random sampling,
//!   and importance sampling with replacement.
//! * [`correction`] — per-alternative sampling-correction offsets and the
//!   corrected choice probabilities they induce.
//! * [`estimation`] — maximum pseudo-likelihood estimation over the corrected
//!   probabilities: analytic gradient and Hessian, Newton ascent with
//!   backtracking, and inverse-Hessian covariance.
//!
//! The crate is `no_std` compatible (with `alloc`); disable the default `std`
//! feature and enable `libm` to build without the standard library. File
//! formats, configuration, and the experiment harness live in the companion
//! `suffset-lab` crate.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("suffset-core requires either the `std` or the `libm` feature");

pub mod correction;
pub mod error;
pub mod estimation;
pub mod math;
pub mod model;
pub mod rng;
pub mod scenario;
pub mod sets;

pub use error::{Error, Result};
