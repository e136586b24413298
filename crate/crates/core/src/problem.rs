//! Finite multistage decision problems over a scenario tree.
//!
//! Stage actions and stage scenarios are identified by their index in the
//! declared ordering (`0..count`).  A problem is described through the
//! [`TreeProblem`] trait: what is admissible at each node, and the total
//! reward of a complete `(actions, scenarios)` pair.  Accrued rewards are
//! folded into that terminal function.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Which of the two moves comes first within a stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StageOrder {
    /// `x_t` is chosen, then `omega_t` is revealed.
    DecisionFirst,
    /// `omega_t` is revealed, then `x_t` is chosen (one-way trading).
    ScenarioFirst,
}

impl StageOrder {
    /// Length of the scenario prefix visible when the stage-`stage` action
    /// is chosen (stages are 0-based).
    pub fn visible_scenarios(self, stage: usize) -> usize {
        match self {
            StageOrder::DecisionFirst => stage,
            StageOrder::ScenarioFirst => stage + 1,
        }
    }
}

/// A finite multistage problem.
///
/// Invariants the engine relies on (and checks where it walks):
/// every reachable node has at least one action and one scenario, the
/// scenario sets depend on the scenario prefix only, and the reward is
/// finite on every complete compatible pair.
pub trait TreeProblem {
    /// Number of stages `T >= 1`.
    fn horizon(&self) -> usize;

    fn stage_order(&self) -> StageOrder;

    /// `|Omega_t(omega_{1:t})|` for the stage following `scenario_prefix`.
    fn scenario_count(&self, scenario_prefix: &[usize]) -> usize;

    /// `|X_t(h_t)|` at the decision point described by the two prefixes.
    ///
    /// For `ScenarioFirst` problems `scenario_prefix` already contains the
    /// current stage scenario.
    fn action_count(&self, action_prefix: &[usize], scenario_prefix: &[usize]) -> usize;

    /// Total reward `r(x, omega)` of a complete compatible pair.
    fn reward(&self, actions: &[usize], scenarios: &[usize]) -> f64;

    fn name(&self) -> String {
        "problem".to_string()
    }
}

impl<P: TreeProblem + ?Sized> TreeProblem for &P {
    fn horizon(&self) -> usize {
        (**self).horizon()
    }
    fn stage_order(&self) -> StageOrder {
        (**self).stage_order()
    }
    fn scenario_count(&self, scenario_prefix: &[usize]) -> usize {
        (**self).scenario_count(scenario_prefix)
    }
    fn action_count(&self, action_prefix: &[usize], scenario_prefix: &[usize]) -> usize {
        (**self).action_count(action_prefix, scenario_prefix)
    }
    fn reward(&self, actions: &[usize], scenarios: &[usize]) -> f64 {
        (**self).reward(actions, scenarios)
    }
    fn name(&self) -> String {
        (**self).name()
    }
}

impl<P: TreeProblem + ?Sized> TreeProblem for Box<P> {
    fn horizon(&self) -> usize {
        (**self).horizon()
    }
    fn stage_order(&self) -> StageOrder {
        (**self).stage_order()
    }
    fn scenario_count(&self, scenario_prefix: &[usize]) -> usize {
        (**self).scenario_count(scenario_prefix)
    }
    fn action_count(&self, action_prefix: &[usize], scenario_prefix: &[usize]) -> usize {
        (**self).action_count(action_prefix, scenario_prefix)
    }
    fn reward(&self, actions: &[usize], scenarios: &[usize]) -> f64 {
        (**self).reward(actions, scenarios)
    }
    fn name(&self) -> String {
        (**self).name()
    }
}

/// A node of the interleaved decision/scenario tree: the action prefix and
/// the scenario prefix observed so far.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct History {
    pub actions: Vec<usize>,
    pub scenarios: Vec<usize>,
}

impl History {
    pub fn new(actions: Vec<usize>, scenarios: Vec<usize>) -> Self {
        History { actions, scenarios }
    }

    pub fn root() -> Self {
        History::default()
    }

    pub fn is_root(&self) -> bool {
        self.actions.is_empty() && self.scenarios.is_empty()
    }

    pub(crate) fn from_slices(actions: &[usize], scenarios: &[usize]) -> Self {
        History {
            actions: actions.to_vec(),
            scenarios: scenarios.to_vec(),
        }
    }

    fn depth(&self) -> usize {
        self.actions.len() + self.scenarios.len()
    }
}

// Breadth-first: shallower histories first, then lexicographic.
impl Ord for History {
    fn cmp(&self, other: &Self) -> Ordering {
        self.depth()
            .cmp(&other.depth())
            .then_with(|| self.actions.len().cmp(&other.actions.len()))
            .then_with(|| self.actions.cmp(&other.actions))
            .then_with(|| self.scenarios.cmp(&other.scenarios))
    }
}

impl PartialOrd for History {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for History {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x={:?} w={:?}", self.actions, self.scenarios)
    }
}

/// Stable identifier of a deterministic policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PolicyId(pub u64);

impl fmt::Display for PolicyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

impl std::str::FromStr for PolicyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        u64::from_str_radix(s, 16)
            .map(PolicyId)
            .map_err(|e| Error::input(format!("bad policy id {s:?}: {e}")))
    }
}

/// A deterministic policy: the stage action chosen at each decision point.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PolicyTable {
    decisions: BTreeMap<History, usize>,
}

impl PolicyTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, history: History, action: usize) {
        self.decisions.insert(history, action);
    }

    pub fn get(&self, history: &History) -> Option<usize> {
        self.decisions.get(history).copied()
    }

    pub fn len(&self) -> usize {
        self.decisions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decisions.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&History, usize)> {
        self.decisions.iter().map(|(h, &a)| (h, a))
    }

    /// SHA-256 over the sorted `(history, action)` pairs, truncated to 64 bits.
    pub fn id(&self) -> PolicyId {
        let mut hasher = Sha256::new();
        for (history, &action) in &self.decisions {
            hasher.update((history.actions.len() as u64).to_le_bytes());
            for &a in &history.actions {
                hasher.update((a as u64).to_le_bytes());
            }
            hasher.update((history.scenarios.len() as u64).to_le_bytes());
            for &w in &history.scenarios {
                hasher.update((w as u64).to_le_bytes());
            }
            hasher.update((action as u64).to_le_bytes());
        }
        let digest = hasher.finalize();
        let mut head = [0u8; 8];
        head.copy_from_slice(&digest[..8]);
        PolicyId(u64::from_be_bytes(head))
    }
}

impl FromIterator<(History, usize)> for PolicyTable {
    fn from_iter<I: IntoIterator<Item = (History, usize)>>(iter: I) -> Self {
        PolicyTable {
            decisions: iter.into_iter().collect(),
        }
    }
}

/// Checks that `scenarios` is a root-to-leaf path of the scenario tree.
pub fn check_scenario_path<P: TreeProblem + ?Sized>(problem: &P, scenarios: &[usize]) -> Result<()> {
    let horizon = problem.horizon();
    if scenarios.len() != horizon {
        return Err(Error::input(format!(
            "scenario path {scenarios:?} has length {}, expected {horizon}",
            scenarios.len()
        )));
    }
    for stage in 0..horizon {
        let count = problem.scenario_count(&scenarios[..stage]);
        if scenarios[stage] >= count {
            return Err(Error::input(format!(
                "unknown scenario path {scenarios:?}: label {} at stage {} (only {count} admissible)",
                scenarios[stage],
                stage + 1
            )));
        }
    }
    Ok(())
}

/// Checks that `(actions, scenarios)` is a complete compatible pair.
pub fn check_compatible<P: TreeProblem + ?Sized>(
    problem: &P,
    actions: &[usize],
    scenarios: &[usize],
) -> Result<()> {
    check_scenario_path(problem, scenarios)?;
    let horizon = problem.horizon();
    if actions.len() != horizon {
        return Err(Error::input(format!(
            "action sequence {actions:?} has length {}, expected {horizon}",
            actions.len()
        )));
    }
    let order = problem.stage_order();
    for stage in 0..horizon {
        let visible = order.visible_scenarios(stage);
        let count = problem.action_count(&actions[..stage], &scenarios[..visible]);
        if actions[stage] >= count {
            return Err(Error::input(format!(
                "action {} infeasible at stage {} for {}",
                actions[stage],
                stage + 1,
                History::from_slices(&actions[..stage], &scenarios[..visible])
            )));
        }
    }
    Ok(())
}

/// All root-to-leaf scenario paths in lexicographic order.
pub fn scenario_paths<P: TreeProblem + ?Sized>(problem: &P, cap: usize) -> Result<Vec<Vec<usize>>> {
    fn walk<P: TreeProblem + ?Sized>(
        problem: &P,
        prefix: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        cap: usize,
    ) -> Result<()> {
        if prefix.len() == problem.horizon() {
            if out.len() == cap {
                return Err(Error::Budget {
                    what: "scenario path",
                    count: cap as u128 + 1,
                    cap: cap as u128,
                });
            }
            out.push(prefix.clone());
            return Ok(());
        }
        let count = problem.scenario_count(prefix);
        if count == 0 {
            return Err(Error::Model {
                history: History::new(Vec::new(), prefix.clone()),
                reason: "empty stage scenario set".to_string(),
            });
        }
        for w in 0..count {
            prefix.push(w);
            walk(problem, prefix, out, cap)?;
            prefix.pop();
        }
        Ok(())
    }

    let mut out = Vec::new();
    walk(problem, &mut Vec::new(), &mut out, cap)?;
    Ok(out)
}
