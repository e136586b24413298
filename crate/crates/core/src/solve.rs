//! Exact adjustable-regret values by backward induction, and evaluation of
//! a fixed policy by the policy-based recursion.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::problem::{check_compatible, check_scenario_path, scenario_paths, History, PolicyTable, StageOrder, TreeProblem};

/// Default cap on enumerated scenario paths for the flat-form evaluation.
pub const DEFAULT_MAX_SCENARIOS: usize = 100_000;

/// Absolute tolerance for value equalities on desk-scale instances.
pub const VALUE_TOLERANCE: f64 = 1e-9;

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta >= 0.0 {
        Ok(())
    } else {
        Err(Error::input(format!("beta must be a finite nonnegative number, got {beta}")))
    }
}

/// Result of [`solve_plain`].
#[derive(Debug, Clone, PartialEq)]
pub struct ArcValue {
    pub beta: f64,
    /// `D(beta)`, the best worst-case adjustable regret.
    pub value: f64,
    /// Optimal policy from the argmin rule, total on every reachable decision point.
    pub policy: PolicyTable,
    /// `D_{t-1}(h_t; beta)` at every stage-start history `h_t`, `t = 1..=T`.
    pub per_history_values: BTreeMap<History, f64>,
}

fn extreme_reward<P: TreeProblem + ?Sized>(problem: &P, scenarios: &[usize], best: bool) -> Result<f64> {
    fn walk<P: TreeProblem + ?Sized>(
        problem: &P,
        scenarios: &[usize],
        actions: &mut Vec<usize>,
        best: bool,
    ) -> Result<f64> {
        let stage = actions.len();
        if stage == problem.horizon() {
            return Ok(problem.reward(actions, scenarios));
        }
        let visible = problem.stage_order().visible_scenarios(stage);
        let count = problem.action_count(actions, &scenarios[..visible]);
        if count == 0 {
            return Err(Error::Model {
                history: History::from_slices(actions, &scenarios[..visible]),
                reason: "empty feasible action set".to_string(),
            });
        }
        let mut acc = if best { f64::NEG_INFINITY } else { f64::INFINITY };
        for a in 0..count {
            actions.push(a);
            let v = walk(problem, scenarios, actions, best)?;
            actions.pop();
            acc = if best { acc.max(v) } else { acc.min(v) };
        }
        Ok(acc)
    }

    check_scenario_path(problem, scenarios)?;
    walk(problem, scenarios, &mut Vec::with_capacity(problem.horizon()), best)
}

/// `r*(omega)`: the best total reward over action sequences compatible with `scenarios`.
pub fn ex_post_optimal<P: TreeProblem + ?Sized>(problem: &P, scenarios: &[usize]) -> Result<f64> {
    extreme_reward(problem, scenarios, true)
}

/// `min_x r(x, omega)` over compatible action sequences.
pub fn ex_post_worst<P: TreeProblem + ?Sized>(problem: &P, scenarios: &[usize]) -> Result<f64> {
    extreme_reward(problem, scenarios, false)
}

/// `beta * r*(omega) - r(x, omega)` for a complete compatible pair.
pub fn terminal_regret<P: TreeProblem + ?Sized>(
    problem: &P,
    actions: &[usize],
    scenarios: &[usize],
    beta: f64,
) -> Result<f64> {
    check_beta(beta)?;
    check_compatible(problem, actions, scenarios)?;
    Ok(beta * ex_post_optimal(problem, scenarios)? - problem.reward(actions, scenarios))
}

struct PlainSolver<'a, P: ?Sized> {
    problem: &'a P,
    beta: f64,
    order: StageOrder,
    horizon: usize,
    best_reward: HashMap<Vec<usize>, f64>,
    policy: PolicyTable,
    values: BTreeMap<History, f64>,
}

impl<P: TreeProblem + ?Sized> PlainSolver<'_, P> {
    fn leaf(&mut self, actions: &[usize], scenarios: &[usize]) -> Result<f64> {
        let best = match self.best_reward.get(scenarios) {
            Some(&v) => v,
            None => {
                let v = ex_post_optimal(self.problem, scenarios)?;
                self.best_reward.insert(scenarios.to_vec(), v);
                v
            }
        };
        Ok(self.beta * best - self.problem.reward(actions, scenarios))
    }

    fn scenario_count(&self, actions: &[usize], scenarios: &[usize]) -> Result<usize> {
        match self.problem.scenario_count(scenarios) {
            0 => Err(Error::Model {
                history: History::from_slices(actions, scenarios),
                reason: "empty stage scenario set".to_string(),
            }),
            n => Ok(n),
        }
    }

    fn action_count(&self, actions: &[usize], scenarios: &[usize]) -> Result<usize> {
        match self.problem.action_count(actions, scenarios) {
            0 => Err(Error::Model {
                history: History::from_slices(actions, scenarios),
                reason: "empty feasible action set".to_string(),
            }),
            n => Ok(n),
        }
    }

    /// `D_{t-1}(h_t)` for the stage-start history `(actions, scenarios)`.
    fn stage_value(&mut self, actions: &mut Vec<usize>, scenarios: &mut Vec<usize>) -> Result<f64> {
        if actions.len() == self.horizon {
            return self.leaf(actions, scenarios);
        }
        let value = match self.order {
            StageOrder::DecisionFirst => self.decide(actions, scenarios, true)?,
            StageOrder::ScenarioFirst => {
                let n = self.scenario_count(actions, scenarios)?;
                let mut worst = f64::NEG_INFINITY;
                for w in 0..n {
                    scenarios.push(w);
                    let v = self.decide(actions, scenarios, false)?;
                    scenarios.pop();
                    worst = worst.max(v);
                }
                worst
            }
        };
        self.values.insert(History::from_slices(actions, scenarios), value);
        Ok(value)
    }

    /// Minimises over the stage action at a decision point and records the
    /// lowest-indexed minimiser.  With `scenario_after`, each action is
    /// followed by a max over the stage scenario.
    fn decide(&mut self, actions: &mut Vec<usize>, scenarios: &mut Vec<usize>, scenario_after: bool) -> Result<f64> {
        let k = self.action_count(actions, scenarios)?;
        let mut best = f64::INFINITY;
        let mut arg = 0;
        for a in 0..k {
            actions.push(a);
            let v = if scenario_after {
                let n = self.scenario_count(actions, scenarios)?;
                let mut worst = f64::NEG_INFINITY;
                for w in 0..n {
                    scenarios.push(w);
                    let v = self.stage_value(actions, scenarios)?;
                    scenarios.pop();
                    worst = worst.max(v);
                }
                worst
            } else {
                self.stage_value(actions, scenarios)?
            };
            actions.pop();
            if v < best {
                best = v;
                arg = a;
            }
        }
        self.policy.insert(History::from_slices(actions, scenarios), arg);
        Ok(best)
    }
}

/// Computes `D(beta)` by the plain backward recursion, with the optimal
/// policy and the value at every stage-start history.
pub fn solve_plain<P: TreeProblem + ?Sized>(problem: &P, beta: f64) -> Result<ArcValue> {
    check_beta(beta)?;
    let horizon = problem.horizon();
    if horizon == 0 {
        return Err(Error::input("horizon must be at least one stage"));
    }
    let mut solver = PlainSolver {
        problem,
        beta,
        order: problem.stage_order(),
        horizon,
        best_reward: HashMap::new(),
        policy: PolicyTable::new(),
        values: BTreeMap::new(),
    };
    let value = solver.stage_value(&mut Vec::new(), &mut Vec::new())?;
    Ok(ArcValue {
        beta,
        value,
        policy: solver.policy,
        per_history_values: solver.values,
    })
}

fn lookup(policy: &PolicyTable, actions: &[usize], scenarios: &[usize]) -> Result<usize> {
    let history = History::from_slices(actions, scenarios);
    policy.get(&history).ok_or(Error::PolicyIncomplete(history))
}

/// The action sequence `pi(omega)` the policy plays along a scenario path.
pub fn rollout<P: TreeProblem + ?Sized>(problem: &P, policy: &PolicyTable, scenarios: &[usize]) -> Result<Vec<usize>> {
    check_scenario_path(problem, scenarios)?;
    let order = problem.stage_order();
    let mut actions = Vec::with_capacity(scenarios.len());
    for stage in 0..problem.horizon() {
        let visible = order.visible_scenarios(stage);
        let a = lookup(policy, &actions, &scenarios[..visible])?;
        if a >= problem.action_count(&actions, &scenarios[..visible]) {
            return Err(Error::input(format!(
                "policy chooses infeasible action {a} at {}",
                History::from_slices(&actions, &scenarios[..visible])
            )));
        }
        actions.push(a);
    }
    Ok(actions)
}

/// `r^pi(omega)`.
pub fn policy_reward<P: TreeProblem + ?Sized>(problem: &P, policy: &PolicyTable, scenarios: &[usize]) -> Result<f64> {
    let actions = rollout(problem, policy, scenarios)?;
    Ok(problem.reward(&actions, scenarios))
}

struct PolicyEvaluator<'a, P: ?Sized> {
    problem: &'a P,
    policy: &'a PolicyTable,
    beta: f64,
    best_reward: HashMap<Vec<usize>, f64>,
}

impl<P: TreeProblem + ?Sized> PolicyEvaluator<'_, P> {
    fn stage_value(&mut self, actions: &mut Vec<usize>, scenarios: &mut Vec<usize>) -> Result<f64> {
        if actions.len() == self.problem.horizon() {
            let best = match self.best_reward.get(scenarios.as_slice()) {
                Some(&v) => v,
                None => {
                    let v = ex_post_optimal(self.problem, scenarios)?;
                    self.best_reward.insert(scenarios.clone(), v);
                    v
                }
            };
            return Ok(self.beta * best - self.problem.reward(actions, scenarios));
        }
        let mut worst = f64::NEG_INFINITY;
        match self.problem.stage_order() {
            StageOrder::DecisionFirst => {
                let a = self.checked_action(actions, scenarios)?;
                actions.push(a);
                for w in 0..self.problem.scenario_count(scenarios) {
                    scenarios.push(w);
                    worst = worst.max(self.stage_value(actions, scenarios)?);
                    scenarios.pop();
                }
                actions.pop();
            }
            StageOrder::ScenarioFirst => {
                for w in 0..self.problem.scenario_count(scenarios) {
                    scenarios.push(w);
                    let a = self.checked_action(actions, scenarios)?;
                    actions.push(a);
                    worst = worst.max(self.stage_value(actions, scenarios)?);
                    actions.pop();
                    scenarios.pop();
                }
            }
        }
        if worst == f64::NEG_INFINITY {
            return Err(Error::Model {
                history: History::from_slices(actions, scenarios),
                reason: "empty stage scenario set".to_string(),
            });
        }
        Ok(worst)
    }

    fn checked_action(&self, actions: &[usize], scenarios: &[usize]) -> Result<usize> {
        let a = lookup(self.policy, actions, scenarios)?;
        if a >= self.problem.action_count(actions, scenarios) {
            return Err(Error::input(format!(
                "policy chooses infeasible action {a} at {}",
                History::from_slices(actions, scenarios)
            )));
        }
        Ok(a)
    }
}

/// `D^pi_{t-1}(h_t; beta)` by the policy-based recursion, from the
/// stage-start history `history`.
///
/// At the root the flat form `max_omega beta r*(omega) - r^pi(omega)` is
/// computed as well and the two must agree.
pub fn evaluate_policy<P: TreeProblem + ?Sized>(
    problem: &P,
    policy: &PolicyTable,
    beta: f64,
    history: &History,
) -> Result<f64> {
    check_beta(beta)?;
    if history.actions.len() != history.scenarios.len() || history.actions.len() > problem.horizon() {
        return Err(Error::input(format!("{history} is not a stage-start history")));
    }
    let mut evaluator = PolicyEvaluator {
        problem,
        policy,
        beta,
        best_reward: HashMap::new(),
    };
    let recursive = evaluator.stage_value(&mut history.actions.clone(), &mut history.scenarios.clone())?;
    if history.is_root() {
        let flat = flat_policy_regret(problem, policy, beta, DEFAULT_MAX_SCENARIOS)?;
        if (flat - recursive).abs() > VALUE_TOLERANCE {
            return Err(Error::Inconsistent(format!(
                "recursive policy regret {recursive} differs from flat form {flat}"
            )));
        }
    }
    Ok(recursive)
}

/// `D^pi(beta) = max_omega beta r*(omega) - r^pi(omega)` over every scenario path.
pub fn flat_policy_regret<P: TreeProblem + ?Sized>(
    problem: &P,
    policy: &PolicyTable,
    beta: f64,
    max_scenarios: usize,
) -> Result<f64> {
    check_beta(beta)?;
    let mut worst = f64::NEG_INFINITY;
    for path in scenario_paths(problem, max_scenarios)? {
        let regret = beta * ex_post_optimal(problem, &path)? - policy_reward(problem, policy, &path)?;
        worst = worst.max(regret);
    }
    Ok(worst)
}
