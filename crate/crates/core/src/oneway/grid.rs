//! Discretized one-way trading as a finite scenario-first tree.

use super::MarketSpec;
use crate::error::{Error, Result};
use crate::problem::{StageOrder, TreeProblem};

/// Prices on an evenly spaced grid over `[m, M]`, sales in multiples of `1/alloc`.
///
/// The price of a period is revealed before the sale.  The last period
/// has a single action that liquidates the remaining inventory.
#[derive(Debug, Clone, PartialEq)]
pub struct OnewayGrid {
    spec: MarketSpec,
    alloc: usize,
    prices: Vec<f64>,
}

impl OnewayGrid {
    pub fn new(spec: MarketSpec, price_points: usize, alloc: usize) -> Result<Self> {
        if price_points < 2 {
            return Err(Error::input("price grid needs at least two points"));
        }
        if alloc == 0 {
            return Err(Error::input("allocation granularity must be positive"));
        }
        let step = spec.spread() / (price_points - 1) as f64;
        let prices = (0..price_points)
            .map(|i| {
                if i + 1 == price_points {
                    spec.max_price()
                } else {
                    spec.min_price() + step * i as f64
                }
            })
            .collect();
        Ok(OnewayGrid { spec, alloc, prices })
    }

    pub fn spec(&self) -> &MarketSpec {
        &self.spec
    }

    pub fn alloc(&self) -> usize {
        self.alloc
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    /// Units sold in each period, the last one included.
    pub fn units_sold(&self, actions: &[usize]) -> Vec<usize> {
        let mut units: Vec<usize> = actions.iter().take(self.spec.periods() - 1).copied().collect();
        if actions.len() == self.spec.periods() {
            let used: usize = units.iter().sum();
            units.push(self.alloc - used);
        }
        units
    }
}

impl TreeProblem for OnewayGrid {
    fn horizon(&self) -> usize {
        self.spec.periods()
    }

    fn stage_order(&self) -> StageOrder {
        StageOrder::ScenarioFirst
    }

    fn scenario_count(&self, _scenario_prefix: &[usize]) -> usize {
        self.prices.len()
    }

    fn action_count(&self, action_prefix: &[usize], _scenario_prefix: &[usize]) -> usize {
        if action_prefix.len() + 1 == self.spec.periods() {
            1
        } else {
            let used: usize = action_prefix.iter().sum();
            self.alloc.saturating_sub(used) + 1
        }
    }

    fn reward(&self, actions: &[usize], scenarios: &[usize]) -> f64 {
        let units = self.units_sold(actions);
        let total: f64 = units
            .iter()
            .zip(scenarios)
            .map(|(&u, &w)| self.prices[w] * u as f64)
            .sum();
        total / self.alloc as f64
    }

    fn name(&self) -> String {
        format!(
            "oneway m={} M={} T={} prices={} alloc={}",
            self.spec.min_price(),
            self.spec.max_price(),
            self.spec.periods(),
            self.prices.len(),
            self.alloc
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shape() {
        let g = OnewayGrid::new(MarketSpec::new(1.0, 2.0, 2).unwrap(), 3, 4).unwrap();
        assert_eq!(g.prices(), &[1.0, 1.5, 2.0]);
        assert_eq!(g.action_count(&[], &[0]), 5);
        assert_eq!(g.action_count(&[3], &[0, 1]), 1);
        assert_eq!(g.units_sold(&[3, 0]), vec![3, 1]);
        assert_eq!(g.reward(&[3, 0], &[2, 0]), (3.0 * 2.0 + 1.0) / 4.0);
        assert!(OnewayGrid::new(*g.spec(), 1, 4).is_err());
        assert!(OnewayGrid::new(*g.spec(), 3, 0).is_err());
    }

    #[test]
    fn three_periods_respect_remaining_inventory() {
        let g = OnewayGrid::new(MarketSpec::new(1.0, 3.0, 3).unwrap(), 2, 2).unwrap();
        assert_eq!(g.action_count(&[], &[0]), 3);
        assert_eq!(g.action_count(&[1], &[0, 0]), 2);
        assert_eq!(g.action_count(&[2], &[0, 0]), 1);
        assert_eq!(g.action_count(&[1, 1], &[0, 0, 0]), 1);
        assert_eq!(g.reward(&[1, 0, 0], &[1, 0, 1]), (3.0 + 3.0) / 2.0);
    }
}
