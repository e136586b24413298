//! Adjustable regret criterion (ARC) for sequential decisions under
//! scenario uncertainty.
//!
//! For a benchmark scale `beta >= 0` the guarantee is
//! `D(beta) = min_pi max_omega beta r*(omega) - r^pi(omega)`, where `r*` is
//! the ex post optimal reward.  `beta = 0` is maximin, `beta = 1` minimax
//! regret, and the root of `D(beta) = 0` is the competitive ratio.
//!
//! * [`solve`]: exact backward induction on finite scenario trees.
//! * [`oracle`]: brute-force enumeration used as ground truth.
//! * [`analysis`]: regret curves, competitive ratios and property checks.
//! * [`oneway`]: closed-form results for one-way trading.

pub mod analysis;
pub mod dominance;
pub mod enumerate;
pub mod error;
pub mod io;
pub mod matrix;
pub mod oneway;
pub mod oracle;
pub mod problem;
pub mod relative;
pub mod solve;
pub mod verify;

pub use analysis::{competitive_ratio, regret_curve, CrResult, RegretCurve};
pub use error::{Error, Result};
pub use matrix::{FnProblem, MatrixProblem};
pub use problem::{History, PolicyId, PolicyTable, StageOrder, TreeProblem};
pub use solve::{evaluate_policy, solve_plain, ArcValue};
