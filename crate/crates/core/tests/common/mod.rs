#![allow(dead_code)]

use std::sync::Arc;

use arc_regret::problem::{StageOrder, TreeProblem};
use arc_regret::FnProblem;
use proptest::prelude::*;

/// Shape of a two-stage instance with constant branching per stage.
#[derive(Debug, Clone)]
pub struct TableSpec {
    pub order: StageOrder,
    pub actions: [usize; 2],
    pub scenarios: [usize; 2],
    pub rewards: Vec<f64>,
}

impl TableSpec {
    pub fn build(&self) -> FnProblem {
        let [a1, a2] = self.actions;
        let [s1, s2] = self.scenarios;
        let rewards = Arc::new(self.rewards.clone());
        FnProblem::new(
            "table",
            2,
            self.order,
            move |w| if w.is_empty() { s1 } else { s2 },
            move |x, _| if x.is_empty() { a1 } else { a2 },
            move |x, w| rewards[((x[0] * a2 + x[1]) * s1 + w[0]) * s2 + w[1]],
        )
        .unwrap()
    }
}

/// Multiples of 1/2 in `[lo, hi]`.
pub fn halves(lo: i32, hi: i32) -> impl Strategy<Value = f64> {
    (2 * lo..=2 * hi).prop_map(|k| k as f64 / 2.0)
}

pub fn table_spec(lo: i32, hi: i32) -> impl Strategy<Value = TableSpec> {
    (
        prop_oneof![Just(StageOrder::DecisionFirst), Just(StageOrder::ScenarioFirst)],
        1usize..=3,
        1usize..=2,
        1usize..=2,
        1usize..=3,
    )
        .prop_flat_map(move |(order, a1, a2, s1, s2)| {
            prop::collection::vec(halves(lo, hi), a1 * a2 * s1 * s2).prop_map(move |rewards| TableSpec {
                order,
                actions: [a1, a2],
                scenarios: [s1, s2],
                rewards,
            })
        })
}

pub fn matrix_rows(lo: i32, hi: i32) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..=4, 1usize..=4)
        .prop_flat_map(move |(r, c)| prop::collection::vec(prop::collection::vec(halves(lo, hi), c), r))
}

/// Betas with exactly representable quarters plus 2/3.
pub fn beta() -> impl Strategy<Value = f64> {
    prop_oneof![(0u32..=8).prop_map(|k| k as f64 / 4.0), Just(2.0 / 3.0)]
}

/// A scenario-first problem rewritten as a decision-first one with a
/// dummy decision in front and a dummy scenario at the end.
pub struct DecisionFirstView<P>(pub P);

impl<P: TreeProblem> TreeProblem for DecisionFirstView<P> {
    fn horizon(&self) -> usize {
        self.0.horizon() + 1
    }

    fn stage_order(&self) -> StageOrder {
        StageOrder::DecisionFirst
    }

    fn scenario_count(&self, prefix: &[usize]) -> usize {
        if prefix.len() < self.0.horizon() {
            self.0.scenario_count(prefix)
        } else {
            1
        }
    }

    fn action_count(&self, actions: &[usize], scenarios: &[usize]) -> usize {
        if actions.is_empty() {
            1
        } else {
            self.0.action_count(&actions[1..], scenarios)
        }
    }

    fn reward(&self, actions: &[usize], scenarios: &[usize]) -> f64 {
        self.0.reward(&actions[1..], &scenarios[..self.0.horizon()])
    }
}
