use super::*;
use crate::linalg::CsrMatrix;

fn opts() -> SolverOptions {
    SolverOptions {
        trace: true,
        ..SolverOptions::default()
    }
}

#[test]
fn bound_constrained_quadratic() {
    // min x² s.t. x >= 1
    let mut p = QpProblem::new(1);
    p.q = vec![2.0];
    p.lower = vec![1.0];
    let s = solve_qp(&p, &opts()).unwrap();
    assert_eq!(s.status, QpStatus::Optimal);
    assert!((s.x[0] - 1.0).abs() < 1e-7);
    assert!((s.objective - 1.0).abs() < 1e-7);
    assert!((s.z_bounds[0] - 2.0).abs() < 1e-6);
}

#[test]
fn projection_onto_halfplane() {
    // (x-2)² + (y-1)² with x + y <= 1
    let mut p = QpProblem::new(2).with_inequalities(
        CsrMatrix::from_triplets(1, 2, &[(0, 0, 1.0), (0, 1, 1.0)]),
        vec![f64::NEG_INFINITY],
        vec![1.0],
    );
    p.q = vec![2.0, 2.0];
    p.c = vec![-4.0, -2.0];
    p.offset = 5.0;
    let s = solve_qp(&p, &opts()).unwrap();
    assert_eq!(s.status, QpStatus::Optimal);
    assert!((s.x[0] - 1.0).abs() < 1e-7, "{:?}", s.x);
    assert!(s.x[1].abs() < 1e-7);
    assert!((s.objective - 2.0).abs() < 1e-7);
    // Multiplier of a <= row is non-positive in this sign convention.
    assert!((s.z_rows[0] + 2.0).abs() < 1e-6, "{:?}", s.z_rows);
}

#[test]
fn unbounded_lp_is_detected() {
    // min -x, x >= 0
    let mut p = QpProblem::new(1);
    p.c = vec![-1.0];
    p.lower = vec![0.0];
    let s = solve_qp(&p, &opts()).unwrap();
    assert_eq!(s.status, QpStatus::Unbounded);
    let ray = s.certificate.unwrap();
    assert!(ray[0] > 0.0);
}

#[test]
fn infeasible_equalities_are_detected() {
    // x + y = 1, x - y = 3, 0 <= x, y <= 1
    let mut p = QpProblem::new(2).with_equalities(
        CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, -1.0)]),
        vec![1.0, 3.0],
    );
    p.lower = vec![0.0, 0.0];
    p.upper = vec![1.0, 1.0];
    p.q = vec![1.0, 1.0];
    let s = solve_qp(&p, &opts()).unwrap();
    assert_eq!(s.status, QpStatus::Infeasible);
    assert!(s.certificate.is_some());
}

#[test]
fn merit_never_increases() {
    let mut p = QpProblem::new(3).with_equalities(
        CsrMatrix::from_triplets(1, 3, &[(0, 0, 1.0), (0, 1, 2.0), (0, 2, -1.0)]),
        vec![4.0],
    );
    p.q = vec![1.0, 0.5, 0.0];
    p.c = vec![-1.0, 3.0, 0.2];
    p.lower = vec![0.0, -1.0, 0.0];
    p.upper = vec![5.0, 2.0, f64::INFINITY];
    let s = solve_qp(&p, &opts()).unwrap();
    assert_eq!(s.status, QpStatus::Optimal);
    for w in s.trace.windows(2) {
        assert!(w[1].merit <= w[0].merit * (1.0 + 1e-6) + 1e-12);
    }
    let mut csv = Vec::new();
    s.write_trace_csv(&mut csv).unwrap();
    assert!(String::from_utf8(csv).unwrap().starts_with("iter,primal_res"));
}

#[test]
fn repeated_solves_are_identical() {
    let mut p = QpProblem::new(2).with_equalities(
        CsrMatrix::from_triplets(1, 2, &[(0, 0, 1.0), (0, 1, 1.0)]),
        vec![1.0],
    );
    p.q = vec![1.0, 3.0];
    p.lower = vec![0.0, 0.0];
    let a = solve_qp(&p, &opts()).unwrap();
    let b = solve_qp(&p, &opts()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn dense_and_sparse_backends_agree() {
    let mut p = QpProblem::new(3).with_equalities(
        CsrMatrix::from_triplets(2, 3, &[(0, 0, 1.0), (0, 1, 1.0), (1, 1, 1.0), (1, 2, -2.0)]),
        vec![2.0, 0.5],
    );
    p.q = vec![1.0, 2.0, 0.5];
    p.c = vec![0.3, -0.1, 0.0];
    p.lower = vec![0.0; 3];
    p.upper = vec![3.0; 3];
    let dense = solve_qp(&p, &SolverOptions { backend: KktBackend::Dense, ..opts() }).unwrap();
    let sparse = solve_qp(&p, &SolverOptions { backend: KktBackend::Sparse, ..opts() }).unwrap();
    for (a, b) in dense.x.iter().zip(&sparse.x) {
        assert!((a - b).abs() < 1e-7);
    }
}

#[test]
fn invalid_options_are_rejected() {
    let p = QpProblem::new(1);
    let bad = SolverOptions { tol: 0.0, ..opts() };
    assert!(solve_qp(&p, &bad).is_err());
}

