//! Primal active-set method for `q > 0` (strictly convex, diagonal Hessian).

use crate::simplex::feasible_point;
use crate::{dot, DenseQp, Outcome};

const TOL: f64 = 1e-10;
const MAX_ITER: usize = 10_000;

/// Gaussian elimination with partial pivoting. `None` if singular.
fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        if a[p][k].abs() < 1e-13 {
            return None;
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            if f != 0.0 {
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    Some(x)
}

/// Rank test for `rows` by elimination on a copy.
fn independent(rows: &[&[f64]]) -> bool {
    let mut m: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
    let n = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..n {
        let Some(p) = (rank..m.len()).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
        else {
            break;
        };
        if m[p][col].abs() < 1e-9 {
            continue;
        }
        m.swap(rank, p);
        for i in rank + 1..m.len() {
            let f = m[i][col] / m[rank][col];
            for j in col..n {
                m[i][j] -= f * m[rank][j];
            }
        }
        rank += 1;
    }
    rank == m.len()
}

/// Solves a strictly convex QP. Panics if some `q[j] <= 0`.
pub fn solve_qp(p: &DenseQp) -> Outcome {
    assert!(p.q.iter().all(|&v| v > 0.0), "active-set oracle needs q > 0");
    let n = p.n();
    // Inequalities a·x <= b, bounds included.
    let mut ineq: Vec<(Vec<f64>, f64)> = p.g.iter().cloned().zip(p.h.iter().copied()).collect();
    for j in 0..n {
        let mut up = vec![0.0; n];
        up[j] = 1.0;
        ineq.push((up, p.upper[j]));
        let mut lo = vec![0.0; n];
        lo[j] = -1.0;
        ineq.push((lo, -p.lower[j]));
    }
    let Some(mut x) = feasible_point(p) else {
        return Outcome::Infeasible;
    };
    let eq_rows: Vec<&[f64]> = p.a_eq.iter().map(|r| r.as_slice()).collect();
    // Keep only an independent subset of the equality rows.
    let mut eqs: Vec<usize> = Vec::new();
    for i in 0..eq_rows.len() {
        let mut trial: Vec<&[f64]> = eqs.iter().map(|&k| eq_rows[k]).collect();
        trial.push(eq_rows[i]);
        if independent(&trial) {
            eqs.push(i);
        }
    }
    // Working set: active inequalities that keep the rows independent.
    let mut work: Vec<usize> = Vec::new();
    for (i, (a, b)) in ineq.iter().enumerate() {
        if (dot(a, &x) - b).abs() <= 1e-9 * (1.0 + b.abs()) {
            let mut trial: Vec<&[f64]> = eqs.iter().map(|&k| eq_rows[k]).collect();
            trial.extend(work.iter().map(|&k| ineq[k].0.as_slice()));
            trial.push(a);
            if trial.len() <= n && independent(&trial) {
                work.push(i);
            }
        }
    }

    for _ in 0..MAX_ITER {
        // EQP: [Q Aᵀ; A 0] [p; λ] = [-g; 0].
        let rows: Vec<&[f64]> = eqs
            .iter()
            .map(|&k| eq_rows[k])
            .chain(work.iter().map(|&k| ineq[k].0.as_slice()))
            .collect();
        let m = rows.len();
        let dim = n + m;
        let mut k = vec![vec![0.0; dim]; dim];
        let mut rhs = vec![0.0; dim];
        for j in 0..n {
            k[j][j] = p.q[j];
            rhs[j] = -(p.q[j] * x[j] + p.c[j]);
        }
        for (i, row) in rows.iter().enumerate() {
            for j in 0..n {
                k[n + i][j] = row[j];
                k[j][n + i] = row[j];
            }
        }
        let sol = gauss_solve(k, rhs).expect("working set kept independent");
        let step = &sol[..n];
        let lam = &sol[n..];
        let step_norm = step.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let scale = 1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if step_norm <= TOL * scale {
            // Multipliers of inequality members (KKT: g + Aᵀλ = 0 with λ ≥ 0 for ≤ rows).
            let ineq_lam = &lam[eqs.len()..];
            let worst = ineq_lam
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1));
            match worst {
                Some((pos, &v)) if v < -1e-10 => {
                    work.remove(pos);
                    continue;
                }
                _ => {
                    let objective = p.objective(&x);
                    return Outcome::Optimal { x, objective };
                }
            }
        }
        let mut alpha = 1.0;
        let mut blocking = None;
        for (i, (a, b)) in ineq.iter().enumerate() {
            if work.contains(&i) {
                continue;
            }
            let ap = dot(a, step);
            if ap > TOL {
                let t = (b - dot(a, &x)) / ap;
                if t < alpha {
                    alpha = t.max(0.0);
                    blocking = Some(i);
                }
            }
        }
        for j in 0..n {
            x[j] += alpha * step[j];
        }
        if let Some(i) = blocking {
            work.push(i);
        }
    }
    panic!("active-set oracle did not converge");
}
