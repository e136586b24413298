//! Brute-force ground truth on tiny instances.
//!
//! Everything here is the literal min/max over every enumerated policy and
//! every scenario path, with `r*` taken from the explicit game tree.  None
//! of it goes through the backward-induction engine.

use crate::enumerate::PolicySpace;
pub use crate::enumerate::EnumerationBudget;
use crate::error::{Error, Result};
use crate::problem::{PolicyTable, TreeProblem};
use crate::solve::{check_beta, VALUE_TOLERANCE};

#[derive(Debug, Clone, PartialEq)]
pub struct MinimaxOracle {
    pub value: f64,
    /// Every policy whose worst-case regret is within tolerance of `value`,
    /// in enumeration order.
    pub optimal: Vec<PolicyTable>,
}

/// `min_pi max_omega beta r*(omega) - r^pi(omega)` by enumeration.
pub fn brute_force_minimax<P: TreeProblem + ?Sized>(
    problem: &P,
    beta: f64,
    budget: &EnumerationBudget,
) -> Result<MinimaxOracle> {
    check_beta(beta)?;
    let space = PolicySpace::build(problem, budget)?;
    let best = space.best_rewards();
    let mut value = f64::INFINITY;
    let mut candidates: Vec<(f64, PolicyTable)> = Vec::new();
    space.for_each_policy(|policy| {
        let regret = policy
            .rewards()
            .iter()
            .zip(&best)
            .map(|(r, b)| beta * b - r)
            .fold(f64::NEG_INFINITY, f64::max);
        if regret <= value + VALUE_TOLERANCE {
            if regret < value {
                value = regret;
                candidates.retain(|(v, _)| *v <= value + VALUE_TOLERANCE);
            }
            candidates.push((regret, policy.table()));
        }
    });
    Ok(MinimaxOracle {
        value,
        optimal: candidates.into_iter().map(|(_, t)| t).collect(),
    })
}

/// `max_pi min_omega r^pi(omega) / r*(omega)` by enumeration.
pub fn brute_force_cr<P: TreeProblem + ?Sized>(problem: &P, budget: &EnumerationBudget) -> Result<f64> {
    let space = PolicySpace::build(problem, budget)?;
    let best = space.best_rewards();
    if let Some(i) = best.iter().position(|&b| b <= 0.0) {
        return Err(Error::domain(format!(
            "ex post optimal reward {} of scenario {:?} is not positive",
            best[i],
            space.scenarios()[i]
        )));
    }
    let mut ratio = f64::NEG_INFINITY;
    space.for_each_policy(|policy| {
        let worst = policy
            .rewards()
            .iter()
            .zip(&best)
            .map(|(r, b)| r / b)
            .fold(f64::INFINITY, f64::min);
        ratio = ratio.max(worst);
    });
    Ok(ratio)
}

/// `max_pi min_omega r^pi(omega)` by enumeration.
pub fn brute_force_maximin<P: TreeProblem + ?Sized>(problem: &P, budget: &EnumerationBudget) -> Result<f64> {
    let space = PolicySpace::build(problem, budget)?;
    let mut value = f64::NEG_INFINITY;
    space.for_each_policy(|policy| {
        let worst = policy.rewards().iter().copied().fold(f64::INFINITY, f64::min);
        value = value.max(worst);
    });
    Ok(value)
}
