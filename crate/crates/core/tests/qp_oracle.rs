mod common;

use gridsched::qpsolver::{solve_qp, KktBackend, QpStatus, SolverOptions};
use gridsched_oracle::{random_lp, random_qp, Outcome};

fn check(instance: &gridsched_oracle::DenseQp, oracle: Outcome, backend: KktBackend) {
    let Outcome::Optimal { objective: expected, x } = oracle else {
        panic!("generator produced a non-optimal instance: {oracle:?}");
    };
    assert!(instance.max_violation(&x) < 1e-8);
    let p = common::to_qp(instance);
    let opts = SolverOptions {
        backend,
        ..SolverOptions::default()
    };
    let sol = solve_qp(&p, &opts).unwrap();
    assert_eq!(sol.status, QpStatus::Optimal);
    assert!(
        common::rel_diff(sol.objective, expected) <= 1e-6,
        "ipm {} vs oracle {}",
        sol.objective,
        expected
    );
    assert!(instance.max_violation(&sol.x) < 1e-6);
}

#[test]
fn lp_matches_simplex() {
    for seed in 0..100 {
        let n = 5 + (seed as usize * 7) % 46;
        let inst = random_lp(seed, n);
        check(&inst, gridsched_oracle::solve_lp(&inst), KktBackend::Auto);
    }
}

#[test]
fn qp_matches_active_set() {
    for seed in 0..100 {
        let n = 5 + (seed as usize * 11) % 46;
        let inst = random_qp(1000 + seed, n);
        check(&inst, gridsched_oracle::solve_qp(&inst), KktBackend::Auto);
    }
}

#[test]
fn sparse_backend_matches_oracle() {
    for seed in 0..20 {
        let inst = random_qp(5000 + seed, 30);
        check(&inst, gridsched_oracle::solve_qp(&inst), KktBackend::Sparse);
        let inst = random_lp(6000 + seed, 30);
        check(&inst, gridsched_oracle::solve_lp(&inst), KktBackend::Sparse);
    }
}
