//! Risk-neutral and risk-averse Wardrop equilibria on networks with
//! stochastic edge delays, worst-case instance generators and certification
//! of price-of-risk-aversion bounds.
//!
//! Edge costs are described by a mean latency `ℓₑ(x)` and a variance
//! `σₑ²(x)`. Risk-averse players minimize `Σℓ + γΣσ²` (mean-var) or
//! `Σℓ + γ√Σσ²` (mean-stdev); risk-neutral players minimize `Σℓ`.

// `!(x >= 0.0)` style checks reject NaN along with negatives
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod function;
pub mod instances;
pub mod network;
pub mod report;
pub mod solver;

pub use error::{Error, Result};
pub use function::LatencyFn;
pub use network::{Edge, EdgeFlow, NetworkInstance, PathAmount, PathFlow, RiskModel};
