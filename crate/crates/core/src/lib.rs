//! Two-sided bounds, iterative refinement and brute-force estimation of the
//! optimal constant `A` in the weighted discrete Hardy inequality
//!
//! ```text
//! (Σ_n u_n (x_1 + … + x_n)^q)^{1/q} <= A (Σ_n v_n x_n^p)^{1/p},  1 < p <= q
//! ```
//!
//! over non-negative sequences.

pub mod error;
pub mod factors;
pub mod families;
pub mod intervals;
pub mod operators;
pub mod oracle;
mod parallel;
pub mod problem;
pub mod refine;
pub mod report;
pub mod sampling;
pub mod selftest;
pub mod sum;
pub mod types;

pub use error::{HardyError, Result};
pub use parallel::{thread_budget, THREADS_ENV};
pub use types::{
    validate_exponents, Exponents, Horizon, TestSequence, TruncationMode, TruncationPolicy,
    WeightKind, WeightSpec,
};
