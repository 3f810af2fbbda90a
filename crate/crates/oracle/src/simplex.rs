//! Two-phase tableau simplex with Bland's anti-cycling rule.

use crate::{dot, DenseQp, Outcome};

const EPS: f64 = 1e-10;

/// Standard form `min cᵀy, M y = r, y ≥ 0` built from a [`DenseQp`] by shifting
/// `x = lower + y` and adding slacks for `G x ≤ h` and `y ≤ upper - lower`.
struct StandardForm {
    m: Vec<Vec<f64>>,
    r: Vec<f64>,
    c: Vec<f64>,
    n_x: usize,
}

fn standard_form(p: &DenseQp) -> StandardForm {
    let n = p.n();
    let n_slack = p.h.len() + n;
    let width = n + n_slack;
    let mut m = Vec::new();
    let mut r = Vec::new();
    let shift = |row: &[f64]| dot(row, &p.lower);
    for (row, b) in p.a_eq.iter().zip(&p.b_eq) {
        let mut v = row.clone();
        v.resize(width, 0.0);
        m.push(v);
        r.push(b - shift(row));
    }
    for (k, (row, h)) in p.g.iter().zip(&p.h).enumerate() {
        let mut v = row.clone();
        v.resize(width, 0.0);
        v[n + k] = 1.0;
        m.push(v);
        r.push(h - shift(row));
    }
    for j in 0..n {
        let mut v = vec![0.0; width];
        v[j] = 1.0;
        v[n + p.h.len() + j] = 1.0;
        m.push(v);
        r.push(p.upper[j] - p.lower[j]);
    }
    let mut c = p.c.clone();
    c.resize(width, 0.0);
    StandardForm { m, r, c, n_x: n }
}

struct Tableau {
    /// Rows of `[B⁻¹M | B⁻¹r]`.
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let piv = self.rows[row][col];
        for v in self.rows[row].iter_mut() {
            *v /= piv;
        }
        let pivot_row = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i != row {
                let f = r[col];
                if f != 0.0 {
                    for (v, p) in r.iter_mut().zip(&pivot_row) {
                        *v -= f * p;
                    }
                }
            }
        }
        self.basis[row] = col;
    }

    /// Minimizes `cost` over the columns flagged in `allowed`. Returns false
    /// when unbounded.
    fn optimize(&mut self, cost: &[f64], allowed: &[bool]) -> bool {
        let width = cost.len();
        loop {
            // Reduced costs via the current basis.
            let mut entering = None;
            for j in 0..width {
                if !allowed[j] || self.basis.contains(&j) {
                    continue;
                }
                let d = cost[j]
                    - self
                        .rows
                        .iter()
                        .zip(&self.basis)
                        .map(|(r, &b)| cost[b] * r[j])
                        .sum::<f64>();
                if d < -EPS {
                    entering = Some(j);
                    break;
                }
            }
            let Some(col) = entering else { return true };
            let mut leave: Option<(usize, f64)> = None;
            for (i, r) in self.rows.iter().enumerate() {
                if r[col] > EPS {
                    let ratio = r[width] / r[col];
                    let better = match leave {
                        None => true,
                        Some((k, best)) => {
                            ratio < best - EPS
                                || (ratio <= best + EPS && self.basis[i] < self.basis[k])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            match leave {
                Some((row, _)) => self.pivot(row, col),
                None => return false,
            }
        }
    }
}

/// Result of phase I: a feasible tableau over the original columns.
fn phase_one(sf: &StandardForm) -> Option<Tableau> {
    let rows = sf.m.len();
    let width = sf.c.len();
    let total = width + rows;
    let mut t = Tableau {
        rows: Vec::with_capacity(rows),
        basis: Vec::with_capacity(rows),
    };
    for i in 0..rows {
        let sign = if sf.r[i] < 0.0 { -1.0 } else { 1.0 };
        let mut v: Vec<f64> = sf.m[i].iter().map(|a| a * sign).collect();
        v.resize(total, 0.0);
        v[width + i] = 1.0;
        v.push(sf.r[i] * sign);
        t.rows.push(v);
        t.basis.push(width + i);
    }
    let mut cost = vec![0.0; total];
    for c in cost.iter_mut().skip(width) {
        *c = 1.0;
    }
    let allowed = vec![true; total];
    t.optimize(&cost, &allowed);
    let infeas: f64 = t
        .rows
        .iter()
        .zip(&t.basis)
        .filter(|(_, &b)| b >= width)
        .map(|(r, _)| r[total])
        .sum();
    let scale = 1.0 + sf.r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if infeas > 1e-8 * scale {
        return None;
    }
    // Drive remaining (zero-level) artificials out of the basis.
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= width {
            if let Some(col) = (0..width).find(|&j| t.rows[i][j].abs() > 1e-9) {
                t.pivot(i, col);
                i += 1;
            } else {
                // Redundant row.
                t.rows.remove(i);
                t.basis.remove(i);
            }
        } else {
            i += 1;
        }
    }
    for r in t.rows.iter_mut() {
        let rhs = r[total];
        r.truncate(width);
        r.push(rhs);
    }
    Some(t)
}

fn extract(t: &Tableau, width: usize) -> Vec<f64> {
    let mut y = vec![0.0; width];
    for (r, &b) in t.rows.iter().zip(&t.basis) {
        y[b] = r[width];
    }
    y
}

/// Any vertex of the feasible set, or `None` when it is empty.
pub fn feasible_point(p: &DenseQp) -> Option<Vec<f64>> {
    let sf = standard_form(p);
    let t = phase_one(&sf)?;
    let y = extract(&t, sf.c.len());
    Some((0..sf.n_x).map(|j| p.lower[j] + y[j]).collect())
}

/// Solves the linear part of `p` (the `q` diagonal is ignored).
pub fn solve_lp(p: &DenseQp) -> Outcome {
    let sf = standard_form(p);
    let Some(mut t) = phase_one(&sf) else {
        return Outcome::Infeasible;
    };
    let allowed = vec![true; sf.c.len()];
    if !t.optimize(&sf.c, &allowed) {
        return Outcome::Unbounded;
    }
    let y = extract(&t, sf.c.len());
    let x: Vec<f64> = (0..sf.n_x).map(|j| p.lower[j] + y[j]).collect();
    let objective = dot(&p.c, &x);
    Outcome::Optimal { x, objective }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_lp() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let p = DenseQp {
            q: vec![0.0; 2],
            c: vec![-3.0, -5.0],
            a_eq: vec![],
            b_eq: vec![],
            g: vec![vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 2.0]],
            h: vec![4.0, 12.0, 18.0],
            lower: vec![0.0; 2],
            upper: vec![100.0; 2],
        };
        match solve_lp(&p) {
            Outcome::Optimal { x, objective } => {
                assert!((x[0] - 2.0).abs() < 1e-9 && (x[1] - 6.0).abs() < 1e-9);
                assert!((objective + 36.0).abs() < 1e-9);
            }
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn infeasible_lp() {
        let p = DenseQp {
            q: vec![0.0],
            c: vec![1.0],
            a_eq: vec![vec![1.0]],
            b_eq: vec![5.0],
            g: vec![],
            h: vec![],
            lower: vec![0.0],
            upper: vec![1.0],
        };
        assert_eq!(solve_lp(&p), Outcome::Infeasible);
    }
}
