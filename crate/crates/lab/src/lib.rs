//! File formats, configuration, Monte Carlo experiment harness, and CLI for
//! the `suffset-core` choice-modeling primitives.

pub mod cli;
pub mod config;
pub mod dataset;
pub mod experiment;
