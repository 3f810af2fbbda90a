mod common;

use gridsched::bnb::{select_branch, solve_miqp, BnbError, BnbOptions};
use gridsched::formulation::build;
use gridsched::model::apply_scenario;
use gridsched::qp::Branch;
use gridsched::qpsolver::{solve_qp, QpStatus, SolverOptions};
use gridsched::scenarios::{solve_instance, RunOptions, ScenarioError};
use gridsched_oracle::random_qp;
use proptest::prelude::*;

fn optimal(p: &gridsched::qp::QpProblem) -> gridsched::qpsolver::QpSolution {
    let s = solve_qp(p, &SolverOptions { trace: true, ..SolverOptions::default() }).unwrap();
    assert_eq!(s.status, QpStatus::Optimal);
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn scaling_the_objective_scales_the_optimum(seed in 0u64..10_000, n in 4usize..30, alpha in 0.1f64..10.0) {
        let p = common::to_qp(&random_qp(seed, n));
        let mut scaled = p.clone();
        scaled.q.iter_mut().for_each(|v| *v *= alpha);
        scaled.c.iter_mut().for_each(|v| *v *= alpha);
        let (a, b) = (optimal(&p), optimal(&scaled));
        prop_assert!(common::rel_diff(b.objective, alpha * a.objective) <= 1e-6);
        for (x, y) in a.x.iter().zip(&b.x) {
            prop_assert!((x - y).abs() <= 1e-4 * (1.0 + x.abs()), "{x} vs {y}");
        }
    }

    #[test]
    fn optimal_solutions_close_the_duality_gap(seed in 0u64..10_000, n in 4usize..30) {
        let s = optimal(&common::to_qp(&random_qp(seed, n)));
        let tol = SolverOptions::default().tol;
        prop_assert!((s.objective - s.dual_objective).abs() <= tol * (1.0 + s.objective.abs()));
        prop_assert!(s.residuals.primal <= tol && s.residuals.dual <= tol && s.residuals.gap <= tol);
    }

    #[test]
    fn merit_never_increases(seed in 0u64..10_000, n in 4usize..30) {
        let s = optimal(&common::to_qp(&random_qp(seed, n)));
        for w in s.trace.windows(2) {
            prop_assert!(w[1].merit <= w[0].merit * (1.0 + 1e-6) + 1e-13);
        }
    }

    #[test]
    fn repeated_solves_are_bitwise_identical(seed in 0u64..10_000, n in 4usize..30) {
        let p = common::to_qp(&random_qp(seed, n));
        let (a, b) = (optimal(&p), optimal(&p));
        prop_assert_eq!(a.iterations, b.iterations);
        prop_assert_eq!(a.x.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                        b.x.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }

    #[test]
    fn children_never_undercut_the_parent_dual_bound(seed in 0u64..10_000) {
        let (m, c) = common::random_microgrid(seed);
        let p = build(&m, &c).unwrap().qp;
        prop_assume!(!p.pairs.is_empty());
        let parent = solve_qp(&p, &SolverOptions::default()).unwrap();
        prop_assume!(parent.is_optimal());
        let pair = p.pairs[0];
        for branch in [Branch::ChargeOnly, Branch::V2gOnly] {
            let child = solve_qp(&p.fix_pair(&pair, branch).unwrap(), &SolverOptions::default()).unwrap();
            if child.is_optimal() {
                // Weak duality: the parent's dual value bounds every restriction.
                let slack = 1e-9 * parent.objective.abs().max(1.0);
                prop_assert!(child.objective >= parent.dual_objective - slack,
                    "{} below dual bound {}", child.objective, parent.dual_objective);
            }
        }
    }

    #[test]
    fn miqp_points_are_complementary_and_metrics_in_range(seed in 0u64..10_000) {
        let (m, c) = common::random_microgrid(seed);
        let solved = solve_instance("p", &m, &c, &RunOptions::default());
        // Terminal-energy rules can make a random fleet genuinely infeasible.
        prop_assume!(!matches!(solved, Err(ScenarioError::Search { source: BnbError::Infeasible, .. })));
        let s = solved.unwrap();
        prop_assert!(s.audit.is_empty(), "{:?}", s.audit.violations.first());
        let r = &s.metrics;
        prop_assert!((0.0..=100.0).contains(&r.lost_load_pct));
        prop_assert!(r.degradation_cost >= -1e-9 || c.beta1 < 0.0);
        let (am, _) = apply_scenario(&m, &c);
        let pv_forecast: f64 = am.renewables().iter()
            .filter(|u| u.kind == gridsched::model::RenewableKind::Pv)
            .flat_map(|u| u.forecast.iter()).sum::<f64>() * c.base_mva;
        prop_assert!(r.pv_utilized <= pv_forecast + 1e-6);
        let f = build(&m, &c).unwrap();
        let b = solve_miqp(&f.qp, &BnbOptions::default()).unwrap();
        prop_assert!(select_branch(&b.x, &f.qp.pairs, 1e-6).is_none());
        prop_assert!(b.gap >= 0.0 && b.gap <= 1e-4);
    }
}
