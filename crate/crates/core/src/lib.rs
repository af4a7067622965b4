//! Exact Bayesian-network structure posteriors over the subset lattice.
//!
//! The crate is `no_std` (it needs `alloc`) and covers the whole numeric
//! pipeline:
//!
//! * [`dataset`]: dense category-coded discrete data and family contingency counts.
//! * [`scores`]: K2 / BDeu local marginal likelihoods folded with a modular prior.
//! * [`dp`]: the subset-lattice dynamic program (alpha tables, forward and
//!   backward contributions, exact order-modular edge posteriors).
//! * [`sampler`]: exact order sampling and direct DAG sampling with an
//!   interval cache.
//! * [`estimators`]: sample-mean, per-order analytic and importance-weighted
//!   deduplicated estimators with sound intervals.
//! * [`features`]: structural feature expressions and their parser.
//! * [`oracle`]: brute-force and independent exact computations for small `n`.
//! * [`metrics`]: SAD/MAD, Hoeffding sample sizes and binomial tests.
//!
//! All probability-like quantities are natural logarithms unless a name says
//! otherwise.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dag;
pub mod dataset;
pub mod dp;
mod error;
pub mod estimators;
pub mod features;
pub mod math;
pub mod metrics;
pub mod oracle;
pub mod sampler;
pub mod scores;
pub mod synth;
pub mod varset;

pub use dag::{Dag, TotalOrder};
pub use dataset::Dataset;
pub use dp::{AlphaTables, DpTables, EdgeMatrix, SubsetTransform};
pub use error::{Error, Result};
pub use estimators::{DagCollection, Estimate};
pub use features::FeatureExpr;
pub use sampler::{DagSample, DdsConfig, IntervalCache};
pub use scores::{FamilyScoreTable, RhoMode, ScoreConfig, ScoreFamily};
pub use varset::VarSet;

/// Default upper bound on the number of variables accepted by the
/// subset-lattice tables.
pub const DEFAULT_MAX_VARIABLES: usize = 25;

/// Hard upper bound: sets are encoded in a `u32` and tables are indexed by
/// `usize`, so anything beyond this cannot be represented at all.
pub const HARD_MAX_VARIABLES: usize = 30;

/// Draws one uniform variate in `[0, 1)` from 53 random bits.
///
/// Every sampling routine in the crate consumes randomness exclusively
/// through this function, one call per decision.
#[inline]
pub fn uniform<R: rand_core::RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
