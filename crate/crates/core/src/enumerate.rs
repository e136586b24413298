//! Explicit game tree of a small problem and literal enumeration of every
//! deterministic policy on it.
//!
//! A policy is enumerated as the actions it picks at the decision points
//! it can reach; two policies that differ only at unreachable points are
//! the same policy here.  Decision points are assigned in breadth-first
//! order (first point most significant), so the enumeration order is
//! reproducible.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::problem::{scenario_paths, History, PolicyTable, StageOrder, TreeProblem};

/// Caps on what the oracle may enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationBudget {
    pub max_policies: u128,
    pub max_scenarios: usize,
    /// Cap on the size of the explicit game tree.
    pub max_nodes: usize,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        EnumerationBudget {
            max_policies: 1_000_000,
            max_scenarios: 100_000,
            max_nodes: 10_000_000,
        }
    }
}

enum Node {
    Decision { history: History, children: Vec<usize> },
    Chance { children: Vec<usize> },
    Leaf { scenario: usize, reward: f64 },
}

/// The full interleaved decision/scenario tree with every leaf reward.
pub struct PolicySpace {
    nodes: Vec<Node>,
    root: usize,
    scenarios: Vec<Vec<usize>>,
    policy_count: u128,
}

struct Builder<'a, P: ?Sized> {
    problem: &'a P,
    order: StageOrder,
    index: HashMap<Vec<usize>, usize>,
    nodes: Vec<Node>,
    max_nodes: usize,
}

impl<P: TreeProblem + ?Sized> Builder<'_, P> {
    fn push(&mut self, node: Node) -> Result<usize> {
        if self.nodes.len() == self.max_nodes {
            return Err(Error::Budget {
                what: "game tree node",
                count: self.max_nodes as u128 + 1,
                cap: self.max_nodes as u128,
            });
        }
        self.nodes.push(node);
        Ok(self.nodes.len() - 1)
    }

    fn stage(&mut self, x: &mut Vec<usize>, w: &mut Vec<usize>) -> Result<usize> {
        if x.len() == self.problem.horizon() {
            let scenario = self.index[w.as_slice()];
            let reward = self.problem.reward(x, w);
            if !reward.is_finite() {
                return Err(Error::Model {
                    history: History::from_slices(x, w),
                    reason: format!("reward {reward} is not finite"),
                });
            }
            return self.push(Node::Leaf { scenario, reward });
        }
        match self.order {
            StageOrder::DecisionFirst => self.decision(x, w, true),
            StageOrder::ScenarioFirst => {
                let mut children = Vec::new();
                for o in 0..self.problem.scenario_count(w) {
                    w.push(o);
                    children.push(self.decision(x, w, false)?);
                    w.pop();
                }
                self.push(Node::Chance { children })
            }
        }
    }

    fn decision(&mut self, x: &mut Vec<usize>, w: &mut Vec<usize>, scenario_after: bool) -> Result<usize> {
        let k = self.problem.action_count(x, w);
        if k == 0 {
            return Err(Error::Model {
                history: History::from_slices(x, w),
                reason: "empty feasible action set".to_string(),
            });
        }
        let mut children = Vec::with_capacity(k);
        for a in 0..k {
            x.push(a);
            let child = if scenario_after {
                let mut branches = Vec::new();
                for o in 0..self.problem.scenario_count(w) {
                    w.push(o);
                    branches.push(self.stage(x, w)?);
                    w.pop();
                }
                self.push(Node::Chance { children: branches })?
            } else {
                self.stage(x, w)?
            };
            x.pop();
            children.push(child);
        }
        self.push(Node::Decision {
            history: History::from_slices(x, w),
            children,
        })
    }
}

/// Read-only view of one enumerated policy.
pub struct PolicyCursor<'a> {
    space: &'a PolicySpace,
    choice: &'a [usize],
    rewards: &'a [f64],
    index: u128,
}

impl PolicyCursor<'_> {
    /// Position in the enumeration order.
    pub fn index(&self) -> u128 {
        self.index
    }

    /// `r^pi(omega)` for every scenario path, in [`PolicySpace::scenarios`] order.
    pub fn rewards(&self) -> &[f64] {
        self.rewards
    }

    /// The policy restricted to the decision points it reaches.
    pub fn table(&self) -> PolicyTable {
        let mut table = PolicyTable::new();
        let mut stack = vec![self.space.root];
        while let Some(id) = stack.pop() {
            match &self.space.nodes[id] {
                Node::Decision { history, children } => {
                    let a = self.choice[id];
                    table.insert(history.clone(), a);
                    stack.push(children[a]);
                }
                Node::Chance { children } => stack.extend(children.iter().copied()),
                Node::Leaf { .. } => {}
            }
        }
        table
    }
}

impl PolicySpace {
    pub fn build<P: TreeProblem + ?Sized>(problem: &P, budget: &EnumerationBudget) -> Result<Self> {
        let scenarios = scenario_paths(problem, budget.max_scenarios)?;
        let index = scenarios
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        let mut builder = Builder {
            problem,
            order: problem.stage_order(),
            index,
            nodes: Vec::new(),
            max_nodes: budget.max_nodes,
        };
        let root = builder.stage(&mut Vec::new(), &mut Vec::new())?;
        let mut space = PolicySpace {
            nodes: builder.nodes,
            root,
            scenarios,
            policy_count: 0,
        };
        space.policy_count = space.count(root);
        if space.policy_count > budget.max_policies {
            return Err(Error::Budget {
                what: "policy",
                count: space.policy_count,
                cap: budget.max_policies,
            });
        }
        Ok(space)
    }

    fn count(&self, id: usize) -> u128 {
        match &self.nodes[id] {
            Node::Decision { children, .. } => children
                .iter()
                .fold(0u128, |acc, &c| acc.saturating_add(self.count(c))),
            Node::Chance { children } => children
                .iter()
                .fold(1u128, |acc, &c| acc.saturating_mul(self.count(c))),
            Node::Leaf { .. } => 1,
        }
    }

    pub fn policy_count(&self) -> u128 {
        self.policy_count
    }

    pub fn scenarios(&self) -> &[Vec<usize>] {
        &self.scenarios
    }

    /// `r*(omega)` as the best leaf reward under each scenario path.
    pub fn best_rewards(&self) -> Vec<f64> {
        let mut best = vec![f64::NEG_INFINITY; self.scenarios.len()];
        for node in &self.nodes {
            if let Node::Leaf { scenario, reward } = node {
                best[*scenario] = best[*scenario].max(*reward);
            }
        }
        best
    }

    /// Visits every deterministic policy once, in enumeration order.
    pub fn for_each_policy(&self, mut visit: impl FnMut(&PolicyCursor<'_>)) {
        let mut choice = vec![0usize; self.nodes.len()];
        let mut rewards = vec![f64::NAN; self.scenarios.len()];
        let mut queue = Vec::new();
        self.descend(self.root, &mut queue, &mut rewards);
        let mut counter = 0u128;
        self.expand(&mut queue, 0, &mut choice, &mut rewards, &mut counter, &mut visit);
    }

    fn descend(&self, id: usize, queue: &mut Vec<usize>, rewards: &mut [f64]) {
        match &self.nodes[id] {
            Node::Decision { .. } => queue.push(id),
            Node::Chance { children } => {
                for &c in children {
                    self.descend(c, queue, rewards);
                }
            }
            Node::Leaf { scenario, reward } => rewards[*scenario] = *reward,
        }
    }

    fn expand(
        &self,
        queue: &mut Vec<usize>,
        pos: usize,
        choice: &mut [usize],
        rewards: &mut [f64],
        counter: &mut u128,
        visit: &mut dyn FnMut(&PolicyCursor<'_>),
    ) {
        if pos == queue.len() {
            visit(&PolicyCursor {
                space: self,
                choice,
                rewards,
                index: *counter,
            });
            *counter += 1;
            return;
        }
        let id = queue[pos];
        let Node::Decision { children, .. } = &self.nodes[id] else {
            unreachable!("only decision nodes are queued");
        };
        for (a, &child) in children.iter().enumerate() {
            choice[id] = a;
            let mark = queue.len();
            self.descend(child, queue, rewards);
            self.expand(queue, pos + 1, choice, rewards, counter, visit);
            queue.truncate(mark);
        }
    }
}
