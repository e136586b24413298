//! Elimination of dominated policies and scenarios.
//!
//! Policies follow the usual relation: `pi` dominates `pi'` when
//! `r^pi(omega) >= r^pi'(omega)` on every scenario.  A scenario is only
//! dropped when another one is at least as bad for every kept policy *and*
//! has at least the same ex post optimum, which is what keeps `D(beta)`
//! unchanged for every `beta >= 0`.  Among identical profiles the lowest
//! enumeration index is kept.

use crate::enumerate::{EnumerationBudget, PolicySpace};
use crate::error::Result;
use crate::matrix::MatrixProblem;
use crate::problem::{PolicyTable, TreeProblem};

#[derive(Debug, Clone, PartialEq)]
pub struct KeptPolicy {
    /// Position in the policy enumeration order.
    pub index: u128,
    pub table: PolicyTable,
    /// `r^pi(omega)` over every scenario path of the original problem.
    pub rewards: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    pub policies: Vec<KeptPolicy>,
    /// Indices of the kept scenario paths (into `all_scenarios`).
    pub scenario_indices: Vec<usize>,
    pub all_scenarios: Vec<Vec<usize>>,
    pub best_rewards: Vec<f64>,
}

impl Reduction {
    pub fn kept_scenarios(&self) -> Vec<Vec<usize>> {
        self.scenario_indices
            .iter()
            .map(|&i| self.all_scenarios[i].clone())
            .collect()
    }

    /// Single-stage instance: kept policies as rows, kept scenarios as
    /// columns.  Column maxima equal the original `r*`.
    pub fn reduced_problem(&self, name: &str) -> MatrixProblem {
        let rows = self
            .policies
            .iter()
            .map(|p| self.scenario_indices.iter().map(|&s| p.rewards[s]).collect())
            .collect();
        MatrixProblem::named(format!("{name}-reduced"), rows).expect("reduction keeps at least one row and column")
    }
}

fn weakly_above(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x >= y)
}

/// Computes the non-dominated policies and scenarios by enumeration.
pub fn eliminate_dominated<P: TreeProblem + ?Sized>(problem: &P, budget: &EnumerationBudget) -> Result<Reduction> {
    let space = PolicySpace::build(problem, budget)?;
    let mut frontier: Vec<KeptPolicy> = Vec::new();
    space.for_each_policy(|policy| {
        let rewards = policy.rewards();
        // Earlier policies win ties, so weak dominance by a kept one discards.
        if frontier.iter().any(|kept| weakly_above(&kept.rewards, rewards)) {
            return;
        }
        frontier.retain(|kept| !weakly_above(rewards, &kept.rewards));
        frontier.push(KeptPolicy {
            index: policy.index(),
            table: policy.table(),
            rewards: rewards.to_vec(),
        });
    });
    frontier.sort_by_key(|p| p.index);

    let best = space.best_rewards();
    let n = space.scenarios().len();
    let column = |s: usize| frontier.iter().map(move |p| p.rewards[s]);
    // `s` beats `t` when it is at least as bad for every kept policy, has
    // at least the benchmark of `t`, and is strictly different or earlier.
    let beats = |s: usize, t: usize| {
        let worse_everywhere = column(s).zip(column(t)).all(|(a, b)| a <= b);
        let benchmark = best[s] >= best[t];
        let identical = best[s] == best[t] && column(s).zip(column(t)).all(|(a, b)| a == b);
        worse_everywhere && benchmark && (!identical || s < t)
    };
    let scenario_indices = (0..n)
        .filter(|&t| !(0..n).any(|s| s != t && beats(s, t)))
        .collect();

    Ok(Reduction {
        policies: frontier,
        scenario_indices,
        all_scenarios: space.scenarios().to_vec(),
        best_rewards: best,
    })
}
