mod common;

use arc_regret::analysis::{competitive_ratio, regret_curve, slope_bounds_check};
use arc_regret::dominance::eliminate_dominated;
use arc_regret::oracle::{brute_force_cr, brute_force_maximin, brute_force_minimax, EnumerationBudget};
use arc_regret::problem::scenario_paths;
use arc_regret::relative::{relative_to, Reference};
use arc_regret::solve::{ex_post_optimal, rollout};
use arc_regret::{evaluate_policy, solve_plain, History, MatrixProblem, StageOrder, TreeProblem};
use common::{beta, matrix_rows, table_spec, DecisionFirstView};
use proptest::prelude::*;

fn budget() -> EnumerationBudget {
    EnumerationBudget::default()
}

/// `min_row max_col beta * colmax - r` written out longhand.
fn matrix_value(rows: &[Vec<f64>], beta: f64) -> f64 {
    let cols = rows[0].len();
    let best: Vec<f64> = (0..cols).map(|c| rows.iter().map(|r| r[c]).fold(f64::MIN, f64::max)).collect();
    rows.iter()
        .map(|r| (0..cols).map(|c| beta * best[c] - r[c]).fold(f64::MIN, f64::max))
        .fold(f64::MAX, f64::min)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn matrix_solve_matches_longhand(rows in matrix_rows(-4, 6), b in beta()) {
        let p = MatrixProblem::new(rows.clone()).unwrap();
        let arc = solve_plain(&p, b).unwrap();
        prop_assert_eq!(arc.value, matrix_value(&rows, b));
        prop_assert_eq!(arc.per_history_values[&History::root()], arc.value);
    }

    #[test]
    fn solve_matches_oracle_on_two_stage_tables(spec in table_spec(-3, 5), b in beta()) {
        let p = spec.build();
        let arc = solve_plain(&p, b).unwrap();
        let oracle = brute_force_minimax(&p, b, &budget()).unwrap();
        prop_assert_eq!(arc.value, oracle.value);
        prop_assert!(oracle.optimal.iter().any(|t| {
            scenario_paths(&p, 1000).unwrap().iter().all(|w| rollout(&p, t, w).unwrap() == rollout(&p, &arc.policy, w).unwrap())
        }), "engine policy is not among the enumerated optimal ones");
    }

    #[test]
    fn beta_zero_is_maximin_and_one_is_minimax_regret(spec in table_spec(-3, 5)) {
        let p = spec.build();
        prop_assert_eq!(solve_plain(&p, 0.0).unwrap().value, -brute_force_maximin(&p, &budget()).unwrap());
        prop_assert_eq!(solve_plain(&p, 1.0).unwrap().value, brute_force_minimax(&p, 1.0, &budget()).unwrap().value);
    }

    #[test]
    fn correspondence_at_every_stage_start_history(spec in table_spec(-3, 5), b in beta()) {
        let p = spec.build();
        let arc = solve_plain(&p, b).unwrap();
        for (h, &v) in &arc.per_history_values {
            let e = evaluate_policy(&p, &arc.policy, b, h).unwrap();
            prop_assert!((e - v).abs() <= 1e-9, "at {}: plain {} vs policy {}", h, v, e);
        }
        prop_assert_eq!(evaluate_policy(&p, &arc.policy, b, &History::root()).unwrap(), arc.value);
    }

    #[test]
    fn elimination_preserves_value(spec in table_spec(-3, 5), b in beta()) {
        let p = spec.build();
        let reduced = eliminate_dominated(&p, &budget()).unwrap().reduced_problem("t");
        prop_assert_eq!(solve_plain(&p, b).unwrap().value, solve_plain(&reduced, b).unwrap().value);
    }

    #[test]
    fn slope_bounds_sandwich(spec in table_spec(-3, 5), b1 in beta(), b2 in beta()) {
        prop_assume!(b1 < b2);
        let w = slope_bounds_check(&spec.build(), b1, b2).unwrap();
        prop_assert!(w.holds(1e-9), "{:?}", w);
    }

    #[test]
    fn continuity_surrogate(spec in table_spec(-3, 5), b in beta(), h in 1u32..8) {
        let p = spec.build();
        let h = h as f64 / 8.0;
        let max_best = scenario_paths(&p, 1000).unwrap().iter()
            .map(|w| ex_post_optimal(&p, w).unwrap().abs()).fold(0.0, f64::max);
        let d = (solve_plain(&p, b + h).unwrap().value - solve_plain(&p, b).unwrap().value).abs();
        prop_assert!(d <= h * max_best + 1e-9);
    }

    #[test]
    fn positive_rewards_give_increasing_curve_and_cr_equivalence(spec in table_spec(1, 6)) {
        let p = spec.build();
        let betas: Vec<f64> = (0..=12).map(|k| k as f64 / 8.0).collect();
        prop_assert!(regret_curve(&p, &betas).unwrap().is_strictly_increasing());
        let cr = competitive_ratio(&p, 1e-9).unwrap();
        prop_assert!(!cr.degenerate);
        prop_assert!(cr.beta0 > 0.0 && cr.beta0 <= 1.0 + 1e-9);
        let ratio = brute_force_cr(&p, &budget()).unwrap();
        prop_assert!((cr.beta0 - ratio).abs() <= 1e-6, "bisection {} vs ratio {}", cr.beta0, ratio);
    }

    #[test]
    fn scenario_first_equals_dummy_decision_form(spec in table_spec(-3, 5), b in beta()) {
        let mut spec = spec;
        spec.order = StageOrder::ScenarioFirst;
        let p = spec.build();
        let view = DecisionFirstView(spec.build());
        prop_assert_eq!(solve_plain(&p, b).unwrap().value, solve_plain(&view, b).unwrap().value);
    }

    #[test]
    fn policy_is_nonanticipative(spec in table_spec(-3, 5), b in beta()) {
        let p = spec.build();
        let arc = solve_plain(&p, b).unwrap();
        let order = p.stage_order();
        for (h, _) in arc.policy.iter() {
            prop_assert_eq!(h.scenarios.len(), order.visible_scenarios(h.actions.len()));
        }
        let paths = scenario_paths(&p, 1000).unwrap();
        for w in &paths {
            for v in &paths {
                let shared = w.iter().zip(v).take_while(|(a, b)| a == b).count();
                let (xw, xv) = (rollout(&p, &arc.policy, w).unwrap(), rollout(&p, &arc.policy, v).unwrap());
                for s in 0..p.horizon() {
                    if order.visible_scenarios(s) <= shared {
                        prop_assert_eq!(xw[s], xv[s]);
                    }
                }
            }
        }
    }

    #[test]
    fn scenario_worst_reference_makes_benchmarks_nonnegative(rows in matrix_rows(-4, 6), b in beta()) {
        let shifted = relative_to(MatrixProblem::new(rows).unwrap(), Reference::ScenarioWorst).unwrap();
        for w in scenario_paths(&shifted, 1000).unwrap() {
            prop_assert!(ex_post_optimal(&shifted, &w).unwrap() >= 0.0);
        }
        prop_assert_eq!(
            solve_plain(&shifted, b).unwrap().value,
            brute_force_minimax(&shifted, b, &budget()).unwrap().value
        );
    }
}

#[test]
fn decision_first_and_scenario_first_matrices_differ() {
    // One decision against one coin: guessing before or after the coin is
    // a different game, and both values are reported.
    let rows = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
    let before = solve_plain(&MatrixProblem::new(rows).unwrap(), 1.0).unwrap().value;
    let after = arc_regret::FnProblem::new(
        "guess-after",
        1,
        StageOrder::ScenarioFirst,
        |_| 2,
        |_, _| 2,
        |x, w| if x[0] == w[0] { 1.0 } else { 0.0 },
    )
    .unwrap();
    assert_eq!(before, 1.0);
    assert_eq!(solve_plain(&after, 1.0).unwrap().value, 0.0);
}
