//! Distributions of the all-time maximal percentage of red balls in Pólya's
//! urn and of the supremum of averaged binomial random walks.
//!
//! Every analytic route (tree functions, generating-function recursion,
//! trinomial root products, Beta-mixed series, digamma closed forms and
//! quadrature) is paired with an independent oracle: exact lattice-path
//! counting, finite-horizon dynamic programming with certified brackets,
//! exact finite-dimensional urn laws and seeded Monte Carlo.

pub mod ballot;
pub mod error;
pub mod numerics;
pub mod polya;
pub mod tree_fn;
pub mod urnsim;
pub mod walk_max;

pub use polya::UrnParams;
pub use urnsim::{Level, SimConfig, SimSummary};
pub use walk_max::{Method, ProbResult, Threshold, WalkParams};

pub use error::{Error, Result};


