//! Thompson sampling with virtual helping agents.
//!
//! Each arm's posterior is sampled `N` times per period (one primary agent
//! plus `N - 1` virtual helpers) and the draws are folded into a single
//! decision statistic by a combiner:
//!
//! * [`combiner::CombinerKind::C1`] averages the draws, shrinking the variance
//!   by `1/N` (more exploitation),
//! * [`combiner::CombinerKind::C2`] uses mean-preserving alternating weights
//!   that inflate the variance by `N` (more exploration),
//! * [`combiner::CombinerKind::C3`] adapts the number of agents to the
//!   observed gap between the two best empirical means and floors the result
//!   at the worst empirical mean.
//!
//! The crate also ships the baselines (plain Thompson sampling, greedy,
//! satisficing Thompson sampling), simulated environments, a numeric
//! evaluator for the finite-time regret bound, and a deterministic parallel
//! Monte Carlo harness. The `tsvha` binary drives all of it from TOML
//! configs.

pub mod cli;
pub mod combiner;
pub mod config;
pub mod envs;
pub mod error;
pub mod harness;
pub mod ingest;
pub mod policy;
pub mod posterior;
pub mod theory;

pub use error::{Error, Result};

/// The random stream type used throughout the crate.
pub type Rng = rand_chacha::ChaCha8Rng;
