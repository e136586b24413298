use crate::error::{Error, Result};
use crate::problem::{StageOrder, TreeProblem};

/// Single-stage problem given as a reward matrix: rows are actions,
/// columns are scenarios.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixProblem {
    name: String,
    rows: Vec<Vec<f64>>,
}

impl MatrixProblem {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::named("matrix", rows)
    }

    pub fn named(name: impl Into<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::input("reward matrix has no rows"));
        };
        let cols = first.len();
        if cols == 0 {
            return Err(Error::input("reward matrix has no columns"));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::input(format!(
                    "row {} has {} entries, expected {cols}",
                    i + 1,
                    row.len()
                )));
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::input(format!("entry ({}, {}) is not finite", i + 1, j + 1)));
            }
        }
        Ok(MatrixProblem {
            name: name.into(),
            rows,
        })
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn col_count(&self) -> usize {
        self.rows[0].len()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.rows[row][col]
    }
}

impl TreeProblem for MatrixProblem {
    fn horizon(&self) -> usize {
        1
    }

    fn stage_order(&self) -> StageOrder {
        StageOrder::DecisionFirst
    }

    fn scenario_count(&self, _scenario_prefix: &[usize]) -> usize {
        self.col_count()
    }

    fn action_count(&self, _action_prefix: &[usize], _scenario_prefix: &[usize]) -> usize {
        self.row_count()
    }

    fn reward(&self, actions: &[usize], scenarios: &[usize]) -> f64 {
        self.rows[actions[0]][scenarios[0]]
    }

    fn name(&self) -> String {
        self.name.clone()
    }
}

type CountFn = Box<dyn Fn(&[usize], &[usize]) -> usize + Send + Sync>;
type ScenarioFn = Box<dyn Fn(&[usize]) -> usize + Send + Sync>;
type RewardFn = Box<dyn Fn(&[usize], &[usize]) -> f64 + Send + Sync>;

/// A multistage problem assembled from closures, for instances that do not
/// warrant their own type.
pub struct FnProblem {
    name: String,
    horizon: usize,
    order: StageOrder,
    scenarios: ScenarioFn,
    actions: CountFn,
    reward: RewardFn,
}

impl FnProblem {
    pub fn new(
        name: impl Into<String>,
        horizon: usize,
        order: StageOrder,
        scenarios: impl Fn(&[usize]) -> usize + Send + Sync + 'static,
        actions: impl Fn(&[usize], &[usize]) -> usize + Send + Sync + 'static,
        reward: impl Fn(&[usize], &[usize]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::input("horizon must be at least one stage"));
        }
        Ok(FnProblem {
            name: name.into(),
            horizon,
            order,
            scenarios: Box::new(scenarios),
            actions: Box::new(actions),
            reward: Box::new(reward),
        })
    }
}

impl TreeProblem for FnProblem {
    fn horizon(&self) -> usize {
        self.horizon
    }

    fn stage_order(&self) -> StageOrder {
        self.order
    }

    fn scenario_count(&self, scenario_prefix: &[usize]) -> usize {
        (self.scenarios)(scenario_prefix)
    }

    fn action_count(&self, action_prefix: &[usize], scenario_prefix: &[usize]) -> usize {
        (self.actions)(action_prefix, scenario_prefix)
    }

    fn reward(&self, actions: &[usize], scenarios: &[usize]) -> f64 {
        (self.reward)(actions, scenarios)
    }

    fn name(&self) -> String {
        self.name.clone()
    }
}

impl std::fmt::Debug for FnProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FnProblem")
            .field("name", &self.name)
            .field("horizon", &self.horizon)
            .field("order", &self.order)
            .finish_non_exhaustive()
    }
}
