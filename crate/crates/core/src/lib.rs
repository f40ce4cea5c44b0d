//! Socially fair (ℓp, k)-clustering.
//!
//! Given clients split into (possibly overlapping) weighted groups, candidate
//! facilities in a metric space, a budget `k` and an exponent `p`, the goal is
//! a set of `k` centers minimizing the largest per-group cost
//! `Σ_{i∈A_s} w_s(i)·d(i,F)^p`.
//!
//! The crate provides:
//!
//! * [`rounding`]: LP-based iterative rounding that opens at most `k+m`
//!   centers at cost within `(5+2√6)^p` of the optimum.
//! * [`sparsify`] and [`convert`]: candidate instance generation and the
//!   conversion of a `k+m` pseudo-solution back to exactly `k` centers.
//! * [`abv`]: the LP filtering baseline.
//! * [`model::brute_force_opt`]: an exhaustive oracle for small instances.
//! * [`data`] and [`bench`]: dataset loading and sweep reporting.

pub mod abv;
pub mod acceptance;
pub mod bench;
pub mod combinatorics;
pub mod convert;
pub mod data;
pub mod gen;
pub mod lp;
pub mod model;
pub mod rounding;
pub mod sparsify;

pub use model::{
    brute_force_opt, evaluate, CenterSet, CostProfile, Group, Instance, ModelError, OracleOptions,
};
