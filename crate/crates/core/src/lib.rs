//! Beam alignment as a Bayesian multi-armed bandit.
//!
//! The belief over the hidden beam-pair index is tracked through a
//! preference vector (log-belief up to a constant) updated additively after
//! every scan. The second-best preference policy scans the arm ranked second
//! by preference, which maximizes both the lower and upper bounds on the
//! Q-function in [`bounds`]. The [`harness`] module runs Monte-Carlo
//! comparisons against first-best, Thompson-style and UCB baselines.
//!
//! Arm indices are 0-based throughout.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod channel;
pub mod error;
pub mod harness;
pub mod policy;
pub mod preference;
pub mod quadrature;
pub mod rate;
pub mod seed;

pub use channel::{compute_nu, GainModel, LinkBudget, Nu, SectoredEnvironment};
pub use error::{Error, Result};
pub use policy::PolicySpec;
pub use preference::{Belief, History, PreferenceVector};
