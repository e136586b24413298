//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p arc-regret --test acceptance`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use arc_regret::analysis::{competitive_ratio, competitive_ratio_with, convexity_check, regret_curve};
use arc_regret::enumerate::PolicySpace;
use arc_regret::oneway::{
    guarantee_curve, overall_guarantee, policy_step, random_paths, realized_regret, simulate, stage_guarantee,
    worst_case_path, MarketSpec, OnewayGrid, TradingState,
};
use arc_regret::oracle::{brute_force_cr, EnumerationBudget};
use arc_regret::solve::solve_plain;
use arc_regret::verify::{builtin_corpus, Check, Verifier};

/// Absolute gap allowed at the finest grid of criterion 1.
const DISCRETIZATION_GAP: f64 = 0.05;
const CRITERION_1_RUNTIME: Duration = Duration::from_secs(10);
const EQUALITY: f64 = 1e-9;
const ROOT_TOLERANCE: f64 = 1e-6;
/// Gap allowed between the finest enumerated ratio and the closed-form root.
const CR_GAP: f64 = 0.03;
const CRITERION_4_RUNTIME: Duration = Duration::from_secs(5);
const TIGHTNESS: f64 = 1e-6;
const RANDOM_PATHS: usize = 1000;
const SEED: u64 = 42;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn market(t: usize) -> MarketSpec {
    MarketSpec::new(1.0, 2.0, t).unwrap()
}

fn closed_form_vs_engine() -> Outcome {
    let started = Instant::now();
    let levels = [(9, 2), (9, 4), (9, 32)];
    let mut worst_final = 0.0f64;
    let mut problems = Vec::new();
    for t in [2, 3] {
        let spec = market(t);
        for beta in [0.6, 0.853553, 1.0, 1.5] {
            let closed = overall_guarantee(beta, &spec).unwrap();
            let gaps: Vec<f64> = levels
                .iter()
                .map(|&(prices, alloc)| {
                    let grid = OnewayGrid::new(spec, prices, alloc).unwrap();
                    (solve_plain(&grid, beta).unwrap().value - closed).abs()
                })
                .collect();
            let last = gaps[gaps.len() - 1];
            worst_final = worst_final.max(last);
            if !gaps.windows(2).all(|w| w[1] < w[0]) || last > DISCRETIZATION_GAP {
                problems.push(format!("T={t} beta={beta}: gaps {gaps:.6?}"));
            }
        }
    }
    let elapsed = started.elapsed();
    let fast = elapsed < CRITERION_1_RUNTIME;
    outcome(
        problems.is_empty() && fast,
        format!(
            "8 (T, beta) cases, gaps strictly shrink over prices=9 alloc 1/2, 1/4, 1/32; max final gap {worst_final:.6} \
             (limit {DISCRETIZATION_GAP}); {:.2}s (limit {}s){}",
            elapsed.as_secs_f64(),
            CRITERION_1_RUNTIME.as_secs(),
            if problems.is_empty() { String::new() } else { format!("; {}", problems.join("; ")) }
        ),
    )
}

fn minimax_regret_special_case() -> Outcome {
    let mut problems = Vec::new();
    for (m, big_m, t) in [(1.0, 2.0, 1), (1.0, 2.0, 2), (1.0, 2.0, 3), (0.5, 3.0, 4), (2.0, 7.0, 6)] {
        let spec = MarketSpec::new(m, big_m, t).unwrap();
        let expected = (big_m - m) * (1.0 - 1.0 / t as f64).powi(t as i32);
        let got = overall_guarantee(1.0, &spec).unwrap();
        if got != expected {
            problems.push(format!("m={m} M={big_m} T={t}: {got} vs {expected}"));
        }
    }
    let spec = market(2);
    if overall_guarantee(1.0, &spec).unwrap() != 0.25 {
        problems.push("D(1) != 0.25 for m=1 M=2 T=2".to_string());
    }
    let start = TradingState::initial(&spec);
    for k in 0..=20 {
        let price = 1.0 + k as f64 / 20.0;
        let (sold, _) = policy_step(&start, price, 1.0, &spec).unwrap();
        if (sold - (price - 1.0)).abs() > EQUALITY {
            problems.push(format!("p1={price}: sold {sold}"));
        }
    }
    for path in [[1.5, 1.0], [1.5, 2.0]] {
        let regret = simulate(&path, 1.0, &spec).unwrap().regret;
        if (regret - 0.25).abs() > EQUALITY {
            problems.push(format!("path {path:?}: regret {regret}"));
        }
    }
    outcome(
        problems.is_empty(),
        if problems.is_empty() {
            "D(1) = (M-m)(1-1/T)^T exactly on 5 markets; 0.25 at m=1 M=2 T=2; sells p1-1 on 21 prices; \
             paths (1.5,1) and (1.5,2) realize 0.25"
                .to_string()
        } else {
            problems.join("; ")
        },
    )
}

fn competitive_ratio_criterion() -> Outcome {
    let spec = market(2);
    let exact = (2.0 + 2f64.sqrt()) / 4.0;
    let root = competitive_ratio_with(|b| overall_guarantee(b, &spec), 1e-9).unwrap().beta0;
    let budget = EnumerationBudget::default();
    let ratios: Vec<f64> = [2, 4, 8]
        .iter()
        .map(|&alloc| brute_force_cr(&OnewayGrid::new(spec, 5, alloc).unwrap(), &budget).unwrap())
        .collect();
    let bisected = competitive_ratio(&OnewayGrid::new(spec, 5, 8).unwrap(), 1e-12).unwrap().beta0;
    let below = ratios.iter().all(|&r| r <= exact);
    let approaching = ratios.windows(2).all(|w| w[1] >= w[0]);
    let gap = exact - ratios[ratios.len() - 1];
    let agree = (bisected - ratios[2]).abs() <= ROOT_TOLERANCE;
    outcome(
        (root - exact).abs() <= ROOT_TOLERANCE && below && approaching && gap <= CR_GAP && agree,
        format!(
            "closed-form root {root:.6} vs (2+sqrt2)/4 = {exact:.6}; enumerated ratios at prices=5 alloc 1/2, 1/4, 1/8: \
             {ratios:.6?}, final gap {gap:.6} (limit {CR_GAP}); grid bisection {bisected:.6}"
        ),
    )
}

fn oracle_equivalence() -> Outcome {
    let started = Instant::now();
    let corpus = builtin_corpus();
    let matrices = corpus.iter().filter(|e| !e.name.starts_with("oneway")).count();
    let grids = corpus.iter().filter(|e| e.name.starts_with("oneway")).count();
    let report = Verifier::default().only([Check::Oracle, Check::Cr]).run(&corpus);
    let elapsed = started.elapsed();
    let failures: Vec<String> = report.failures().map(|l| l.to_string()).collect();
    outcome(
        failures.is_empty() && matrices >= 6 && grids >= 2 && elapsed < CRITERION_4_RUNTIME,
        format!(
            "{} instances ({grids} one-way grids): minimax and maximin agree exactly on 6 betas, CR policy sets agree; \
             {:.2}s (limit {}s){}",
            corpus.len(),
            elapsed.as_secs_f64(),
            CRITERION_4_RUNTIME.as_secs(),
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }
        ),
    )
}

fn property_suite() -> Outcome {
    let corpus = builtin_corpus();
    let report = Verifier::default().only([Check::Correspondence, Check::Slope]).run(&corpus);
    let mut problems: Vec<String> = report.failures().map(|l| l.to_string()).collect();

    let betas: Vec<f64> = (0..200).map(|k| 0.05 + 2.95 * k as f64 / 199.0).collect();
    let curve = guarantee_curve(&market(2), &betas).unwrap();
    if !convexity_check(&curve, EQUALITY).unwrap() {
        problems.push("one-way curve fails the midpoint test".to_string());
    }
    let budget = EnumerationBudget::default();
    let grid: Vec<f64> = (0..=30).map(|k| k as f64 * 0.05).collect();
    let mut positive = 0;
    for entry in &corpus {
        let space = PolicySpace::build(entry.problem.as_ref(), &budget).unwrap();
        if space.best_rewards().iter().all(|&b| b > 0.0) {
            positive += 1;
            if !regret_curve(entry.problem.as_ref(), &grid).unwrap().is_strictly_increasing() {
                problems.push(format!("{}: D not strictly increasing", entry.name));
            }
        }
    }
    outcome(
        problems.is_empty(),
        format!(
            "correspondence and 15 slope pairs on {} instances; one-way curve convex on 200 betas in [0.05, 3]; \
             D strictly increasing on {positive} positive instances{}",
            corpus.len(),
            if problems.is_empty() { String::new() } else { format!("; {}", problems.join("; ")) }
        ),
    )
}

fn guarantee_tightness() -> Outcome {
    let mut problems = Vec::new();
    let mut worst_gap = 0.0f64;
    let mut combos = 0;
    for beta in [0.3, 0.6, 0.853553, 1.0, 1.5] {
        for t in [1, 2, 3, 5] {
            combos += 1;
            let spec = market(t);
            let start = TradingState::initial(&spec);
            let guaranteed = stage_guarantee(&start, beta, &spec).unwrap();
            let path = worst_case_path(beta, &spec, &start).unwrap();
            let gap = (realized_regret(&path, beta, &spec, &start).unwrap() - guaranteed).abs();
            worst_gap = worst_gap.max(gap);
            if gap > TIGHTNESS {
                problems.push(format!("beta={beta} T={t}: adversary off by {gap:e}"));
            }
            let exceed = random_paths(&spec, RANDOM_PATHS, SEED)
                .iter()
                .filter(|p| !simulate(p, beta, &spec).unwrap().within_guarantee)
                .count();
            if exceed > 0 {
                problems.push(format!("beta={beta} T={t}: {exceed} random paths exceed the guarantee"));
            }
        }
    }
    outcome(
        problems.is_empty(),
        format!(
            "{combos} (beta, T) combinations: adversary within {worst_gap:.1e} (limit {TIGHTNESS:e}); \
             {RANDOM_PATHS} paths each (seed {SEED}) stay within the guarantee{}",
            if problems.is_empty() { String::new() } else { format!("; {}", problems.join("; ")) }
        ),
    )
}

fn elimination_invariance() -> Outcome {
    let corpus = builtin_corpus();
    let report = Verifier::default().only([Check::Elimination]).run(&corpus);
    let failures: Vec<String> = report.failures().map(|l| l.to_string()).collect();
    outcome(
        failures.is_empty(),
        format!(
            "values identical before and after elimination on {} instances x 6 betas{}",
            corpus.len(),
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("closed form vs engine", closed_form_vs_engine),
        ("minimax regret special case", minimax_regret_special_case),
        ("competitive ratio", competitive_ratio_criterion),
        ("oracle equivalence", oracle_equivalence),
        ("property suite", property_suite),
        ("guarantee tightness", guarantee_tightness),
        ("elimination invariance", elimination_invariance),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.passed {
            failed += 1;
        }
        println!("{} [{}] {name}: {}", if o.passed { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
