//! Differentially private counting of partially ordered binary data.
//!
//! Records are binary vectors whose supports are upward closed with respect
//! to a poset of survey-style questions (a follow-up question can only be
//! answered after its parent). Releasing the per-question counts with noise
//! drawn from the norm ball tailored to that order beats generic ℓp noise,
//! and the ball can be sampled in `O(d^2)` time via a triangulation indexed
//! by extended bipartitions.
//!
//! Module map:
//! - [`poset`]: closure-matrix posets, parsing, metrics, rooted augmentation
//! - [`eb`]: extended bipartitions, enumeration, and the recursive sampler
//! - [`chains`]: filter-chain pairs and the bijection with bipartitions
//! - [`simplex`]: triangulation simplices, exact volumes, barycentric checks
//! - [`sampling`]: uniform samplers for simplices, ℓp balls, poset balls
//! - [`mechanism`]: K-norm noise and the private counting pipeline
//! - [`analysis`]: closed-form norms, membership oracles, statistical tests
//! - [`randposet`]: uniform random DAGs by Markov chain, posets from DAGs
//! - [`experiments`]: seeded batch runs producing ratio and sweep tables
//! - [`verification`]: named check suites reused by the CLI and tests

pub mod analysis;
pub mod chains;
pub mod eb;
pub mod error;
pub mod experiments;
pub mod mechanism;
pub mod poset;
pub mod randposet;
pub mod rng;
pub mod sampling;
pub mod simplex;
pub mod verification;

pub use chains::{FilterChain, FilterChainPair};
pub use eb::{ExtendedBipartition, MaximalPolicy};
pub use error::{Error, Result};
pub use mechanism::{CountVector, MechanismConfig};
pub use poset::{Poset, PosetMetrics, RootedPoset};
pub use simplex::Simplex;
