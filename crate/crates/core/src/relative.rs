//! Relative rewards `r_+(x, omega) = r(x, omega) - f(omega)`.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::problem::{scenario_paths, StageOrder, TreeProblem};
use crate::solve::{ex_post_optimal, ex_post_worst, DEFAULT_MAX_SCENARIOS};

/// Built-in reference points `f(omega)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reference {
    /// `f(omega) = min_x r(x, omega)`.
    ScenarioWorst,
    /// `f(omega) = min_omega' r*(omega')`, a constant.
    LowestExPost,
}

/// A problem whose reward is shifted by a per-scenario reference.
#[derive(Debug, Clone)]
pub struct RelativeReward<P> {
    inner: P,
    offsets: HashMap<Vec<usize>, f64>,
}

impl<P: TreeProblem> RelativeReward<P> {
    pub fn inner(&self) -> &P {
        &self.inner
    }

    pub fn offset(&self, scenarios: &[usize]) -> Option<f64> {
        self.offsets.get(scenarios).copied()
    }
}

/// Shifts every reward of `problem` by `reference(omega)`.
pub fn relative_reward_transform<P, F>(problem: P, reference: F) -> Result<RelativeReward<P>>
where
    P: TreeProblem,
    F: Fn(&[usize]) -> f64,
{
    let mut offsets = HashMap::new();
    for path in scenario_paths(&problem, DEFAULT_MAX_SCENARIOS)? {
        let f = reference(&path);
        if !f.is_finite() {
            return Err(Error::input(format!("reference value {f} on scenario {path:?} is not finite")));
        }
        offsets.insert(path, f);
    }
    Ok(RelativeReward { inner: problem, offsets })
}

/// [`relative_reward_transform`] with one of the built-in references.
pub fn relative_to<P: TreeProblem>(problem: P, reference: Reference) -> Result<RelativeReward<P>> {
    let paths = scenario_paths(&problem, DEFAULT_MAX_SCENARIOS)?;
    let mut table = HashMap::with_capacity(paths.len());
    match reference {
        Reference::ScenarioWorst => {
            for path in paths {
                let f = ex_post_worst(&problem, &path)?;
                table.insert(path, f);
            }
        }
        Reference::LowestExPost => {
            let mut lowest = f64::INFINITY;
            for path in &paths {
                lowest = lowest.min(ex_post_optimal(&problem, path)?);
            }
            table.extend(paths.into_iter().map(|p| (p, lowest)));
        }
    }
    relative_reward_transform(problem, |w| table[w])
}

impl<P: TreeProblem> TreeProblem for RelativeReward<P> {
    fn horizon(&self) -> usize {
        self.inner.horizon()
    }

    fn stage_order(&self) -> StageOrder {
        self.inner.stage_order()
    }

    fn scenario_count(&self, scenario_prefix: &[usize]) -> usize {
        self.inner.scenario_count(scenario_prefix)
    }

    fn action_count(&self, action_prefix: &[usize], scenario_prefix: &[usize]) -> usize {
        self.inner.action_count(action_prefix, scenario_prefix)
    }

    fn reward(&self, actions: &[usize], scenarios: &[usize]) -> f64 {
        self.inner.reward(actions, scenarios) - self.offsets[scenarios]
    }

    fn name(&self) -> String {
        format!("{}+relative", self.inner.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::MatrixProblem;

    fn basic() -> MatrixProblem {
        MatrixProblem::new(vec![vec![3.0, 1.0], vec![2.0, 2.0]]).unwrap()
    }

    fn as_matrix<P: TreeProblem>(p: &P) -> Vec<Vec<f64>> {
        (0..p.action_count(&[], &[]))
            .map(|a| (0..p.scenario_count(&[])).map(|w| p.reward(&[a], &[w])).collect())
            .collect()
    }

    #[test]
    fn zero_reference_is_identity() {
        let shifted = relative_reward_transform(basic(), |_| 0.0).unwrap();
        assert_eq!(as_matrix(&shifted), as_matrix(&basic()));
    }

    #[test]
    fn scenario_worst_reference() {
        let shifted = relative_to(basic(), Reference::ScenarioWorst).unwrap();
        assert_eq!(as_matrix(&shifted), vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        for w in 0..2 {
            assert!(ex_post_optimal(&shifted, &[w]).unwrap() >= 0.0);
        }
    }

    #[test]
    fn lowest_ex_post_reference_is_constant() {
        let p = MatrixProblem::new(vec![vec![-3.0, 1.0], vec![-2.0, 0.0]]).unwrap();
        let shifted = relative_to(p, Reference::LowestExPost).unwrap();
        assert_eq!(shifted.offset(&[0]), Some(-2.0));
        assert_eq!(shifted.offset(&[1]), Some(-2.0));
        assert_eq!(as_matrix(&shifted), vec![vec![-1.0, 3.0], vec![0.0, 2.0]]);
    }

    #[test]
    fn non_finite_reference_is_rejected() {
        assert!(relative_reward_transform(basic(), |w| if w[0] == 1 { f64::NAN } else { 0.0 }).is_err());
    }
}
