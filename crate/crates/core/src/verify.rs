//! Self-verification over a builtin corpus of desk-size instances.
//!
//! Every check compares two independent computations: the plain
//! recursion against the brute-force oracle, the recursion against the
//! policy-based evaluation, bisection against enumerated ratios, and so on.

use std::fmt;
use std::str::FromStr;

use crate::analysis::{
    competitive_ratio, convexity_check, cr_policy_sets, rdc_diagnostic, rdc_on_profiles,
    regret_curve, slope_bounds_check, RegretCurve,
};
use crate::dominance::eliminate_dominated;
use crate::enumerate::{EnumerationBudget, PolicySpace};
use crate::error::{Error, Result};
use crate::matrix::{FnProblem, MatrixProblem};
use crate::oneway::{guarantee_curve, MarketSpec, OnewayGrid};
use crate::oracle::{brute_force_cr, brute_force_maximin, brute_force_minimax};
use crate::problem::{StageOrder, TreeProblem};
use crate::solve::{evaluate_policy, solve_plain, VALUE_TOLERANCE};

/// Betas at which every corpus instance is checked.
pub const CORPUS_BETAS: [f64; 6] = [0.0, 0.25, 0.5, 2.0 / 3.0, 1.0, 1.5];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Check {
    Oracle,
    Correspondence,
    Slope,
    Convexity,
    Cr,
    Elimination,
}

impl Check {
    pub const ALL: [Check; 6] = [
        Check::Oracle,
        Check::Correspondence,
        Check::Slope,
        Check::Convexity,
        Check::Cr,
        Check::Elimination,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Oracle => "oracle",
            Check::Correspondence => "correspondence",
            Check::Slope => "slope",
            Check::Convexity => "convexity",
            Check::Cr => "cr",
            Check::Elimination => "elimination",
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Check::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::input(format!("unknown check '{s}'")))
    }
}

pub struct CorpusEntry {
    pub name: String,
    pub problem: Box<dyn TreeProblem + Send + Sync>,
}

impl CorpusEntry {
    pub fn new(name: impl Into<String>, problem: impl TreeProblem + Send + Sync + 'static) -> Self {
        CorpusEntry {
            name: name.into(),
            problem: Box::new(problem),
        }
    }
}

impl fmt::Debug for CorpusEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CorpusEntry").field("name", &self.name).finish_non_exhaustive()
    }
}

fn matrix(name: &str, rows: &[&[f64]]) -> CorpusEntry {
    let problem = MatrixProblem::named(name, rows.iter().map(|r| r.to_vec()).collect()).expect("valid builtin matrix");
    CorpusEntry::new(name, problem)
}

/// Two rounds of guessing a coin; the second guess pays a quarter per
/// unit of its index when it misses.
pub fn two_stage_guess() -> FnProblem {
    FnProblem::new(
        "two-stage-guess",
        2,
        StageOrder::DecisionFirst,
        |_| 2,
        |x, _| if x.is_empty() { 2 } else { 3 },
        |x, w| {
            let first = if x[0] == w[0] { 1.0 } else { 0.0 };
            let second = if x[1] == w[1] { 0.5 } else { 0.25 * x[1] as f64 };
            1.0 + first + second
        },
    )
    .expect("valid builtin problem")
}

/// The instances `verify` runs on.
pub fn builtin_corpus() -> Vec<CorpusEntry> {
    let market = MarketSpec::new(1.0, 2.0, 2).expect("valid market");
    vec![
        matrix("basic", &[&[3.0, 1.0], &[2.0, 2.0]]),
        matrix("identity", &[&[1.0, 0.0], &[0.0, 1.0]]),
        matrix("dominated-row", &[&[3.0, 1.0], &[3.0, 2.0]]),
        matrix("positive-identity", &[&[2.0, 1.0], &[1.0, 2.0]]),
        matrix("rdc-augmented", &[&[3.0, 1.0], &[2.0, 2.0], &[2.5, 1.5]]),
        matrix("three-by-three", &[&[4.0, 0.5, 2.0], &[1.0, 3.0, 2.5], &[2.0, 2.0, 2.0]]),
        matrix("single-row", &[&[1.0, 4.0, 2.5]]),
        matrix("negative", &[&[-3.0, 1.0], &[-2.0, 0.0]]),
        CorpusEntry::new("oneway-p3-a4", OnewayGrid::new(market, 3, 4).expect("valid grid")),
        CorpusEntry::new("oneway-p5-a2", OnewayGrid::new(market, 5, 2).expect("valid grid")),
        CorpusEntry::new("two-stage-guess", two_stage_guess()),
    ]
}

/// Closed-form markets whose curves get the convexity test.
pub fn builtin_markets() -> Vec<MarketSpec> {
    [(1.0, 2.0, 1), (1.0, 2.0, 2), (1.0, 2.0, 3), (1.0, 4.0, 5), (2.0, 2.0, 3)]
        .into_iter()
        .map(|(m, big_m, t)| MarketSpec::new(m, big_m, t).expect("valid market"))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub check: Check,
    pub instance: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} {} {}: {}", self.check, self.instance, self.detail)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerifyReport {
    pub lines: Vec<CheckLine>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.lines.iter().all(|l| l.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckLine> {
        self.lines.iter().filter(|l| !l.passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for line in &self.lines {
            writeln!(f, "{line}")?;
        }
        let failed = self.failures().count();
        write!(f, "{} checks, {} passed, {} failed", self.lines.len(), self.lines.len() - failed, failed)
    }
}

type SolveFn = dyn Fn(&str, &dyn TreeProblem, f64) -> Result<f64> + Send + Sync;

/// Runs the checks; the solve used for value comparisons can be replaced
/// to test the harness itself.
pub struct Verifier {
    solve: Box<SolveFn>,
    only: Option<Vec<Check>>,
    budget: EnumerationBudget,
}

impl Default for Verifier {
    fn default() -> Self {
        Verifier {
            solve: Box::new(|_, problem, beta| Ok(solve_plain(problem, beta)?.value)),
            only: None,
            budget: EnumerationBudget::default(),
        }
    }
}

impl fmt::Debug for Verifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Verifier")
            .field("only", &self.only)
            .field("budget", &self.budget)
            .finish_non_exhaustive()
    }
}

impl Verifier {
    pub fn with_solver(mut self, solve: impl Fn(&str, &dyn TreeProblem, f64) -> Result<f64> + Send + Sync + 'static) -> Self {
        self.solve = Box::new(solve);
        self
    }

    pub fn only(mut self, checks: impl IntoIterator<Item = Check>) -> Self {
        self.only = Some(checks.into_iter().collect());
        self
    }

    fn enabled(&self, check: Check) -> bool {
        self.only.as_ref().is_none_or(|c| c.contains(&check))
    }

    pub fn run(&self, corpus: &[CorpusEntry]) -> VerifyReport {
        let mut report = VerifyReport::default();
        for entry in corpus {
            let problem: &dyn TreeProblem = entry.problem.as_ref();
            for check in Check::ALL {
                if !self.enabled(check) {
                    continue;
                }
                let outcome = match check {
                    Check::Oracle => self.oracle(&entry.name, problem).map(Some),
                    Check::Correspondence => correspondence(problem).map(Some),
                    Check::Slope => slope(problem).map(Some),
                    Check::Convexity => convexity(problem, &self.budget),
                    Check::Cr => cr(problem, &self.budget).map(Some),
                    Check::Elimination => self.elimination(&entry.name, problem).map(Some),
                };
                let (passed, detail) = match outcome {
                    Ok(Some(result)) => result,
                    Ok(None) => continue,
                    Err(e) => (false, format!("error: {e}")),
                };
                report.lines.push(CheckLine {
                    check,
                    instance: entry.name.clone(),
                    passed,
                    detail,
                });
            }
        }
        if self.enabled(Check::Convexity) {
            for spec in builtin_markets() {
                let (passed, detail) = match market_convexity(&spec) {
                    Ok(r) => r,
                    Err(e) => (false, format!("error: {e}")),
                };
                report.lines.push(CheckLine {
                    check: Check::Convexity,
                    instance: format!("oneway m={} M={} T={}", spec.min_price(), spec.max_price(), spec.periods()),
                    passed,
                    detail,
                });
            }
        }
        report
    }

    fn oracle(&self, name: &str, problem: &dyn TreeProblem) -> Result<(bool, String)> {
        for beta in CORPUS_BETAS {
            let oracle = brute_force_minimax(problem, beta, &self.budget)?.value;
            let engine = (self.solve)(name, problem, beta)?;
            if oracle != engine {
                return Ok((false, format!("beta={beta:.6}: oracle {oracle:.6} vs solve {engine:.6}")));
            }
        }
        let maximin = brute_force_maximin(problem, &self.budget)?;
        let d0 = (self.solve)(name, problem, 0.0)?;
        if maximin != -d0 {
            return Ok((false, format!("maximin {maximin:.6} vs -D(0) = {:.6}", -d0)));
        }
        Ok((true, format!("{} betas agree exactly; maximin {maximin:.6}", CORPUS_BETAS.len())))
    }

    fn elimination(&self, name: &str, problem: &dyn TreeProblem) -> Result<(bool, String)> {
        let reduction = eliminate_dominated(problem, &self.budget)?;
        let reduced = reduction.reduced_problem(name);
        for beta in CORPUS_BETAS {
            let before = (self.solve)(name, problem, beta)?;
            let after = solve_plain(&reduced, beta)?.value;
            if before != after {
                return Ok((false, format!("beta={beta:.6}: {before:.6} before, {after:.6} after")));
            }
        }
        Ok((
            true,
            format!(
                "{} policies x {} scenarios kept of {} scenarios",
                reduction.policies.len(),
                reduction.scenario_indices.len(),
                reduction.all_scenarios.len()
            ),
        ))
    }
}

fn correspondence(problem: &dyn TreeProblem) -> Result<(bool, String)> {
    let mut histories = 0;
    for beta in CORPUS_BETAS {
        let arc = solve_plain(problem, beta)?;
        for (history, &value) in &arc.per_history_values {
            let evaluated = evaluate_policy(problem, &arc.policy, beta, history)?;
            if (evaluated - value).abs() > VALUE_TOLERANCE {
                return Ok((
                    false,
                    format!("beta={beta:.6} at {history}: plain {value:.6} vs policy {evaluated:.6}"),
                ));
            }
            histories += 1;
        }
    }
    Ok((true, format!("{histories} stage-start histories agree")))
}

fn slope(problem: &dyn TreeProblem) -> Result<(bool, String)> {
    let mut pairs = 0;
    for (i, &b1) in CORPUS_BETAS.iter().enumerate() {
        for &b2 in &CORPUS_BETAS[i + 1..] {
            let w = slope_bounds_check(problem, b1, b2)?;
            if !w.holds(VALUE_TOLERANCE) {
                return Ok((
                    false,
                    format!(
                        "betas ({b1:.6}, {b2:.6}): quotient {:.6} outside [{:.6}, {:.6}]",
                        w.quotient, w.lower, w.upper
                    ),
                ));
            }
            pairs += 1;
        }
    }
    Ok((true, format!("{pairs} beta pairs inside the slope bounds")))
}

fn convexity(problem: &dyn TreeProblem, budget: &EnumerationBudget) -> Result<Option<(bool, String)>> {
    let report = rdc_diagnostic(problem, None, budget)?;
    if !report.holds() {
        return Ok(None);
    }
    let betas: Vec<f64> = (0..=40).map(|k| k as f64 * 0.05).collect();
    let curve = regret_curve(problem, &betas)?;
    if !convexity_check(&curve, VALUE_TOLERANCE)? {
        return Ok(Some((false, "RDC holds but the sampled curve is not convex".to_string())));
    }
    // Optimal sets inherit the property.
    let space = PolicySpace::build(problem, budget)?;
    let mut profiles = Vec::new();
    space.for_each_policy(|p| profiles.push(p.rewards().to_vec()));
    for beta in CORPUS_BETAS {
        let optimal = brute_force_minimax(problem, beta, budget)?.optimal;
        let ids: Vec<_> = optimal.iter().map(|t| t.id()).collect();
        let kept: Vec<Vec<f64>> = report
            .policy_ids
            .iter()
            .zip(&profiles)
            .filter(|(id, _)| ids.contains(id))
            .map(|(_, r)| r.clone())
            .collect();
        if rdc_on_profiles(&kept, &report.lambda_grid)?.iter().any(|p| p.witness.is_none()) {
            return Ok(Some((false, format!("optimal set at beta={beta:.6} loses RDC"))));
        }
    }
    Ok(Some((true, format!("RDC holds; {} samples convex; optimal sets keep RDC", curve.len()))))
}

fn market_convexity(spec: &MarketSpec) -> Result<(bool, String)> {
    let betas: Vec<f64> = (0..200).map(|k| 0.05 + 2.95 * k as f64 / 199.0).collect();
    let curve: RegretCurve = guarantee_curve(spec, &betas)?;
    let convex = convexity_check(&curve, VALUE_TOLERANCE)?;
    let increasing = curve.is_strictly_increasing();
    Ok((
        convex && increasing,
        format!("closed-form curve on 200 betas: convex {convex}, strictly increasing {increasing}"),
    ))
}

fn cr(problem: &dyn TreeProblem, budget: &EnumerationBudget) -> Result<(bool, String)> {
    let space = PolicySpace::build(problem, budget)?;
    let positive = space.best_rewards().iter().all(|&b| b > 0.0);
    let result = competitive_ratio(problem, 1e-9)?;
    let maximin = brute_force_maximin(problem, budget)?;
    if result.degenerate != (maximin <= 0.0) {
        return Ok((false, format!("degenerate flag {} but maximin {maximin:.6}", result.degenerate)));
    }
    if positive {
        let betas: Vec<f64> = (0..=30).map(|k| k as f64 * 0.05).collect();
        if !regret_curve(problem, &betas)?.is_strictly_increasing() {
            return Ok((false, "r* > 0 but D(beta) is not strictly increasing".to_string()));
        }
    }
    if result.degenerate {
        return Ok((true, format!("degenerate, D(0) = {:.6}", result.residual)));
    }
    if !positive {
        return Ok((
            true,
            format!("ratio undefined (r* <= 0); root {:.6}, residual {:.2e}", result.beta0, result.residual),
        ));
    }
    let ratio = brute_force_cr(problem, budget)?;
    if (ratio - result.beta0).abs() > 1e-6 {
        return Ok((false, format!("bisection {:.6} vs enumerated ratio {ratio:.6}", result.beta0)));
    }
    let sets = cr_policy_sets(problem, budget)?;
    if !sets.agree() {
        return Ok((
            false,
            format!("optimal sets differ: regret {:?}, ratio {:?}", sets.regret_optimal, sets.ratio_optimal),
        ));
    }
    Ok((
        true,
        format!(
            "beta0 {:.6} = ratio {ratio:.6}; {} shared optimal policies",
            result.beta0,
            sets.ratio_optimal.len()
        ),
    ))
}
