//! Regret curves, competitive-ratio extraction and executable checks of
//! the structural properties of `D(beta)` on finite instances.

use std::fmt;

use crate::enumerate::{EnumerationBudget, PolicySpace};
use crate::error::{Error, Result};
use crate::problem::{scenario_paths, PolicyId, TreeProblem};
use crate::solve::{check_beta, ex_post_optimal, policy_reward, solve_plain, DEFAULT_MAX_SCENARIOS, VALUE_TOLERANCE};

/// Default bracket width for [`competitive_ratio`].
pub const DEFAULT_CR_TOLERANCE: f64 = 1e-9;
/// Iteration cap for the bisection.
pub const MAX_BISECTION_ITERATIONS: usize = 200;
/// Set-membership tolerance of [`cr_policy_set_check`].
pub const POLICY_SET_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSample {
    pub beta: f64,
    pub value: f64,
    pub policy_id: Option<PolicyId>,
}

/// Sampled `D(beta)` with strictly increasing betas.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretCurve {
    pub problem_id: String,
    samples: Vec<CurveSample>,
}

impl RegretCurve {
    pub fn new(problem_id: impl Into<String>, samples: Vec<CurveSample>) -> Result<Self> {
        check_betas(samples.iter().map(|s| s.beta))?;
        if let Some(s) = samples.iter().find(|s| !s.value.is_finite()) {
            return Err(Error::input(format!("curve value {} at beta {} is not finite", s.value, s.beta)));
        }
        Ok(RegretCurve {
            problem_id: problem_id.into(),
            samples,
        })
    }

    pub fn samples(&self) -> &[CurveSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.samples.windows(2).all(|w| w[1].value > w[0].value)
    }
}

fn check_betas(betas: impl Iterator<Item = f64>) -> Result<()> {
    let mut prev: Option<f64> = None;
    for beta in betas {
        check_beta(beta)?;
        if let Some(p) = prev {
            if beta <= p {
                return Err(Error::input(format!("betas must be strictly increasing: {beta} after {p}")));
            }
        }
        prev = Some(beta);
    }
    Ok(())
}

/// One plain solve per beta.
pub fn regret_curve<P: TreeProblem + ?Sized>(problem: &P, betas: &[f64]) -> Result<RegretCurve> {
    check_betas(betas.iter().copied())?;
    let samples = betas
        .iter()
        .map(|&beta| {
            let arc = solve_plain(problem, beta)?;
            Ok(CurveSample {
                beta,
                value: arc.value,
                policy_id: Some(arc.policy.id()),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    RegretCurve::new(problem.name(), samples)
}

/// Outcome of the root search for `D(beta) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrResult {
    pub beta0: f64,
    pub tolerance: f64,
    pub iterations: usize,
    /// `D(0) >= 0`, so no unique root exists; `beta0` is then 0.
    pub degenerate: bool,
    /// The upper end had to be moved past 1 to find `D >= 0`.
    pub bracket_expanded: bool,
    /// `D(beta0)`.
    pub residual: f64,
}

/// Bisection of a nondecreasing function with `d(0) < 0`.
pub fn competitive_ratio_with<F>(mut d: F, tol: f64) -> Result<CrResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::input(format!("tolerance must be positive, got {tol}")));
    }
    let d0 = d(0.0)?;
    if d0 >= 0.0 {
        return Ok(CrResult {
            beta0: 0.0,
            tolerance: tol,
            iterations: 0,
            degenerate: true,
            bracket_expanded: false,
            residual: d0,
        });
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut bracket_expanded = false;
    let mut d_hi = d(hi)?;
    while d_hi < 0.0 {
        if hi >= 1e12 {
            return Err(Error::domain(format!("D(beta) stays negative up to beta = {hi}")));
        }
        lo = hi;
        hi *= 2.0;
        bracket_expanded = true;
        d_hi = d(hi)?;
    }
    if d_hi == 0.0 {
        return Ok(CrResult {
            beta0: hi,
            tolerance: tol,
            iterations: 0,
            degenerate: false,
            bracket_expanded,
            residual: 0.0,
        });
    }
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        let value = d(mid)?;
        if value == 0.0 || (hi - lo <= tol && value.abs() <= tol) || iterations == MAX_BISECTION_ITERATIONS {
            return Ok(CrResult {
                beta0: mid,
                tolerance: tol,
                iterations,
                degenerate: false,
                bracket_expanded,
                residual: value,
            });
        }
        if value < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Root of `D(beta) = 0` from plain solves.
pub fn competitive_ratio<P: TreeProblem + ?Sized>(problem: &P, tol: f64) -> Result<CrResult> {
    competitive_ratio_with(|beta| Ok(solve_plain(problem, beta)?.value), tol)
}

/// Optimal-policy sets of the two formulations, by enumeration index.
#[derive(Debug, Clone, PartialEq)]
pub struct CrPolicySets {
    pub beta0: f64,
    /// Policies minimizing worst-case regret at `beta0`.
    pub regret_optimal: Vec<u128>,
    /// Policies maximizing the worst-case reward ratio.
    pub ratio_optimal: Vec<u128>,
}

impl CrPolicySets {
    pub fn agree(&self) -> bool {
        self.regret_optimal == self.ratio_optimal
    }
}

pub fn cr_policy_sets<P: TreeProblem + ?Sized>(problem: &P, budget: &EnumerationBudget) -> Result<CrPolicySets> {
    let space = PolicySpace::build(problem, budget)?;
    let best = space.best_rewards();
    if let Some(i) = best.iter().position(|&b| b <= 0.0) {
        return Err(Error::domain(format!(
            "ex post optimal reward of scenario {:?} is not positive",
            space.scenarios()[i]
        )));
    }
    let cr = competitive_ratio(problem, 1e-12)?;
    if cr.degenerate {
        return Err(Error::domain("D(0) >= 0, competitive ratio undefined"));
    }
    let beta0 = cr.beta0;
    let mut regrets = Vec::new();
    let mut ratios = Vec::new();
    space.for_each_policy(|policy| {
        let r = policy.rewards();
        regrets.push(r.iter().zip(&best).map(|(r, b)| beta0 * b - r).fold(f64::NEG_INFINITY, f64::max));
        ratios.push(r.iter().zip(&best).map(|(r, b)| r / b).fold(f64::INFINITY, f64::min));
    });
    let least = regrets.iter().copied().fold(f64::INFINITY, f64::min);
    let most = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pick = |keep: &dyn Fn(usize) -> bool| (0..regrets.len()).filter(|&i| keep(i)).map(|i| i as u128).collect();
    Ok(CrPolicySets {
        beta0,
        regret_optimal: pick(&|i| regrets[i] <= least + POLICY_SET_TOLERANCE),
        ratio_optimal: pick(&|i| ratios[i] >= most - POLICY_SET_TOLERANCE),
    })
}

/// Whether the regret-optimal set at the root equals the ratio-optimal set.
pub fn cr_policy_set_check<P: TreeProblem + ?Sized>(problem: &P, budget: &EnumerationBudget) -> Result<bool> {
    Ok(cr_policy_sets(problem, budget)?.agree())
}

/// Worst scenarios bracketing the slope of `D` between two betas.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeWitness {
    pub beta1: f64,
    pub beta2: f64,
    pub value1: f64,
    pub value2: f64,
    /// Worst scenario of the `beta1` policy against the `beta2` benchmark.
    pub omega21: Vec<usize>,
    /// Worst scenario of the `beta2` policy against the `beta1` benchmark.
    pub omega12: Vec<usize>,
    /// `r*(omega21)`
    pub upper: f64,
    /// `r*(omega12)`
    pub lower: f64,
    pub quotient: f64,
}

impl SlopeWitness {
    /// `r*(omega12) <= quotient <= r*(omega21)` up to `tol`.
    pub fn holds(&self, tol: f64) -> bool {
        self.lower <= self.quotient + tol && self.quotient <= self.upper + tol
    }
}

pub fn slope_bounds_check<P: TreeProblem + ?Sized>(problem: &P, beta1: f64, beta2: f64) -> Result<SlopeWitness> {
    check_beta(beta1)?;
    check_beta(beta2)?;
    if beta1 >= beta2 {
        return Err(Error::input(format!("need beta1 < beta2, got {beta1} and {beta2}")));
    }
    let first = solve_plain(problem, beta1)?;
    let second = solve_plain(problem, beta2)?;
    let paths = scenario_paths(problem, DEFAULT_MAX_SCENARIOS)?;
    let mut worst21: Option<(f64, usize)> = None;
    let mut worst12: Option<(f64, usize)> = None;
    let mut best = Vec::with_capacity(paths.len());
    for (i, w) in paths.iter().enumerate() {
        let star = ex_post_optimal(problem, w)?;
        best.push(star);
        let r21 = beta2 * star - policy_reward(problem, &first.policy, w)?;
        let r12 = beta1 * star - policy_reward(problem, &second.policy, w)?;
        if worst21.is_none_or(|(v, _)| r21 > v) {
            worst21 = Some((r21, i));
        }
        if worst12.is_none_or(|(v, _)| r12 > v) {
            worst12 = Some((r12, i));
        }
    }
    let (_, i21) = worst21.expect("at least one scenario path");
    let (_, i12) = worst12.expect("at least one scenario path");
    Ok(SlopeWitness {
        beta1,
        beta2,
        value1: first.value,
        value2: second.value,
        omega21: paths[i21].clone(),
        omega12: paths[i12].clone(),
        upper: best[i21],
        lower: best[i12],
        quotient: (second.value - first.value) / (beta2 - beta1),
    })
}

/// Discrete midpoint test: each interior sample lies on or below the chord
/// of its neighbours, up to `tol`.
pub fn convexity_check(curve: &RegretCurve, tol: f64) -> Result<bool> {
    if curve.len() < 3 {
        return Err(Error::input(format!(
            "convexity check needs at least 3 samples, got {}",
            curve.len()
        )));
    }
    Ok(curve.samples().windows(3).all(|w| {
        let (a, b, c) = (w[0], w[1], w[2]);
        let t = (b.beta - a.beta) / (c.beta - a.beta);
        let chord = a.value + t * (c.value - a.value);
        b.value <= chord + tol
    }))
}

/// `k/16` for `k = 1..=15`.
pub fn default_lambda_grid() -> Vec<f64> {
    (1..16).map(|k| k as f64 / 16.0).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RdcPair {
    pub first: usize,
    pub second: usize,
    /// Dominating policy and the mixture weight it was found for.
    pub witness: Option<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RdcReport {
    pub lambda_grid: Vec<f64>,
    pub policy_ids: Vec<PolicyId>,
    pub pairs: Vec<RdcPair>,
}

impl RdcReport {
    pub fn holds(&self) -> bool {
        self.pairs.iter().all(|p| p.witness.is_some())
    }

    pub fn failures(&self) -> impl Iterator<Item = &RdcPair> {
        self.pairs.iter().filter(|p| p.witness.is_none())
    }
}

impl fmt::Display for RdcReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for pair in &self.pairs {
            match pair.witness {
                Some((k, lambda)) => writeln!(
                    f,
                    "pair ({}, {}): satisfied by policy {} at lambda={lambda:.6}",
                    pair.first, pair.second, k
                )?,
                None => writeln!(f, "pair ({}, {}): no dominating mixture on the grid", pair.first, pair.second)?,
            }
        }
        write!(
            f,
            "RDC {}: {} of {} pairs satisfied",
            if self.holds() { "holds" } else { "fails" },
            self.pairs.len() - self.failures().count(),
            self.pairs.len()
        )
    }
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::input("lambda grid is empty"));
    }
    match grid.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
        Some(l) => Err(Error::input(format!("lambda {l} outside (0, 1)"))),
        None => Ok(()),
    }
}

/// RDC search over explicit reward profiles (one per policy).
pub fn rdc_on_profiles(profiles: &[Vec<f64>], lambda_grid: &[f64]) -> Result<Vec<RdcPair>> {
    validate_grid(lambda_grid)?;
    let n = profiles.len();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i..n {
            let order = [i, j].into_iter().chain((0..n).filter(|&k| k != i && k != j));
            let candidates: Vec<usize> = if i == j { vec![i] } else { order.collect() };
            let witness = lambda_grid.iter().find_map(|&lambda| {
                candidates
                    .iter()
                    .find(|&&k| {
                        profiles[k].iter().enumerate().all(|(w, &r)| {
                            r + VALUE_TOLERANCE >= lambda * profiles[i][w] + (1.0 - lambda) * profiles[j][w]
                        })
                    })
                    .map(|&k| (k, lambda))
            });
            pairs.push(RdcPair {
                first: i,
                second: j,
                witness,
            });
        }
    }
    Ok(pairs)
}

/// Reward dominance convexity of the enumerated policy set.
pub fn rdc_diagnostic<P: TreeProblem + ?Sized>(
    problem: &P,
    lambda_grid: Option<&[f64]>,
    budget: &EnumerationBudget,
) -> Result<RdcReport> {
    let grid = lambda_grid.map_or_else(default_lambda_grid, <[f64]>::to_vec);
    validate_grid(&grid)?;
    let space = PolicySpace::build(problem, budget)?;
    let mut profiles = Vec::new();
    let mut policy_ids = Vec::new();
    space.for_each_policy(|policy| {
        profiles.push(policy.rewards().to_vec());
        policy_ids.push(policy.table().id());
    });
    let pairs = rdc_on_profiles(&profiles, &grid)?;
    Ok(RdcReport {
        lambda_grid: grid,
        policy_ids,
        pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::MatrixProblem;

    fn matrix(rows: &[&[f64]]) -> MatrixProblem {
        MatrixProblem::new(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn basic() -> MatrixProblem {
        matrix(&[&[3.0, 1.0], &[2.0, 2.0]])
    }

    #[test]
    fn basic_curve_values() {
        let c = regret_curve(&basic(), &[0.0, 2.0 / 3.0, 1.0]).unwrap();
        let by_hand = |b: f64| f64::min(2.0 * b - 1.0, 3.0 * b - 2.0).max(-2.0);
        for s in c.samples() {
            assert!((s.value - by_hand(s.beta)).abs() < 1e-12, "{s:?}");
            assert!(s.policy_id.is_some());
        }
        assert_eq!(c.samples()[0].value, -2.0);
        assert!(c.samples()[1].value.abs() < 1e-12);
        assert_eq!(c.samples()[2].value, 1.0);
    }

    #[test]
    fn curve_rejects_bad_betas() {
        assert!(regret_curve(&basic(), &[0.5, 0.5]).is_err());
        assert!(regret_curve(&basic(), &[0.5, 0.2]).is_err());
        assert!(regret_curve(&basic(), &[-0.1, 0.2]).is_err());
        assert!(regret_curve(&basic(), &[f64::NAN]).is_err());
    }

    #[test]
    fn basic_competitive_ratio() {
        let cr = competitive_ratio(&basic(), 1e-9).unwrap();
        assert!(!cr.degenerate);
        assert!((cr.beta0 - 2.0 / 3.0).abs() <= 1e-9);
        assert!(cr.residual.abs() <= 1e-9);
        assert!(cr.iterations <= MAX_BISECTION_ITERATIONS);
    }

    #[test]
    fn identity_is_degenerate() {
        let cr = competitive_ratio(&matrix(&[&[1.0, 0.0], &[0.0, 1.0]]), 1e-9).unwrap();
        assert!(cr.degenerate);
        assert_eq!(cr.residual, 0.0);
    }

    #[test]
    fn bracket_expands_when_d1_is_negative() {
        // D(beta) = beta - 3 has its root beyond 1.
        let cr = competitive_ratio_with(|b| Ok(b - 3.0), 1e-10).unwrap();
        assert!(cr.bracket_expanded);
        assert!((cr.beta0 - 3.0).abs() <= 1e-10);
        assert!(competitive_ratio_with(|_| Ok(-1.0), 1e-9).is_err());
        assert!(competitive_ratio_with(|b| Ok(b - 0.5), 0.0).is_err());
    }

    #[test]
    fn policy_sets_agree_on_small_matrices() {
        let b = EnumerationBudget::default();
        let sets = cr_policy_sets(&basic(), &b).unwrap();
        assert_eq!(sets.regret_optimal, vec![1]);
        assert_eq!(sets.ratio_optimal, vec![1]);
        assert!(cr_policy_set_check(&matrix(&[&[1.0, 2.0, 3.0]]), &b).unwrap());
        assert!(cr_policy_set_check(&matrix(&[&[2.0, 1.0], &[1.0, 2.0]]), &b).unwrap());
        assert!(cr_policy_set_check(&matrix(&[&[1.0, 0.0], &[0.0, 1.0]]), &b).is_err());
    }

    #[test]
    fn slope_witness_for_basic() {
        let w = slope_bounds_check(&basic(), 0.0, 1.0).unwrap();
        assert_eq!(w.quotient, 3.0);
        assert!(w.holds(1e-12));
        assert!(w.lower >= 2.0 && w.upper <= 3.0);
        assert!(slope_bounds_check(&basic(), 0.5, 0.5).is_err());
        assert!(slope_bounds_check(&basic(), 0.7, 0.5).is_err());
    }

    fn curve(points: &[(f64, f64)]) -> RegretCurve {
        RegretCurve::new(
            "t",
            points
                .iter()
                .map(|&(beta, value)| CurveSample {
                    beta,
                    value,
                    policy_id: None,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn convexity_midpoint_test() {
        assert!(convexity_check(&curve(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0), (4.0, 9.0)]), 1e-12).unwrap());
        assert!(!convexity_check(&curve(&[(0.0, 0.0), (1.0, 1.0), (2.0, 1.5)]), 1e-12).unwrap());
        assert!(convexity_check(&curve(&[(0.0, 0.0), (1.0, 1.0)]), 1e-12).is_err());
    }

    #[test]
    fn rdc_examples() {
        let b = EnumerationBudget::default();
        let identity = rdc_diagnostic(&matrix(&[&[1.0, 0.0], &[0.0, 1.0]]), None, &b).unwrap();
        assert!(!identity.holds());
        assert_eq!(identity.failures().map(|p| (p.first, p.second)).collect::<Vec<_>>(), vec![(0, 1)]);
        assert_eq!(identity.pairs[0].witness.map(|w| w.0), Some(0));

        let augmented = rdc_diagnostic(&matrix(&[&[3.0, 1.0], &[2.0, 2.0], &[2.5, 1.5]]), None, &b).unwrap();
        let pair = augmented.pairs.iter().find(|p| (p.first, p.second) == (0, 1)).unwrap();
        assert_eq!(pair.witness, Some((2, 0.5)));
        // (3,1) and (2.5,1.5) mix along a line no row reaches.
        assert!(!augmented.holds());
        assert!(augmented.to_string().contains("RDC fails"));

        assert!(rdc_diagnostic(&basic(), Some(&[0.0, 0.5]), &b).is_err());
    }
}
