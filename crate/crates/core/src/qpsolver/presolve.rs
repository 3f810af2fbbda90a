//! Reduction of a [`QpProblem`] to `min ½zᵀQz + cᵀz, Az = b, l ≤ z ≤ u`.
//!
//! Fixed columns are substituted out, inequality rows get a bounded slack,
//! empty rows are checked and dropped, and every remaining row is scaled to
//! unit infinity norm.

use crate::linalg::CsrMatrix;
use crate::qp::QpProblem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum ColumnMap {
    Kept(usize),
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum RowOrigin {
    Eq(usize),
    /// Inequality row realized with the slack column `slack`, or as an
    /// equality when its two bounds coincide.
    Ineq { row: usize, slack: Option<usize> },
}

#[derive(Debug, Clone)]
pub(crate) struct Reduced {
    pub n: usize,
    pub q: Vec<f64>,
    pub c: Vec<f64>,
    pub offset: f64,
    pub a: CsrMatrix,
    pub b: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub columns: Vec<ColumnMap>,
    pub rows: Vec<RowOrigin>,
    pub row_scale: Vec<f64>,
}

/// Presolve found a row that no point can satisfy.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct TrivialInfeasibility {
    pub row: RowOrigin,
    pub residual: f64,
}

const EMPTY_ROW_TOL: f64 = 1e-9;

pub(crate) fn reduce(p: &QpProblem) -> Result<Reduced, TrivialInfeasibility> {
    let mut columns = Vec::with_capacity(p.n);
    let mut q = Vec::new();
    let mut c = Vec::new();
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    let mut offset = p.offset;
    for j in 0..p.n {
        if p.lower[j] == p.upper[j] {
            let v = p.lower[j];
            offset += 0.5 * p.q[j] * v * v + p.c[j] * v;
            columns.push(ColumnMap::Fixed(v));
        } else {
            columns.push(ColumnMap::Kept(q.len()));
            q.push(p.q[j]);
            c.push(p.c[j]);
            lower.push(p.lower[j]);
            upper.push(p.upper[j]);
        }
    }

    let mut triplets = Vec::new();
    let mut b = Vec::new();
    let mut rows = Vec::new();
    let mut scratch: Vec<(usize, f64)> = Vec::new();

    // Splits a row into kept entries and the contribution of fixed columns.
    let split = |row: &mut dyn Iterator<Item = (usize, f64)>, out: &mut Vec<(usize, f64)>| {
        out.clear();
        let mut fixed = 0.0;
        for (j, v) in row {
            match columns[j] {
                ColumnMap::Kept(k) => out.push((k, v)),
                ColumnMap::Fixed(x) => fixed += v * x,
            }
        }
        fixed
    };

    for i in 0..p.a_eq.nrows() {
        let fixed = split(&mut p.a_eq.row(i), &mut scratch);
        let rhs = p.b_eq[i] - fixed;
        if scratch.iter().all(|&(_, v)| v == 0.0) {
            if rhs.abs() > EMPTY_ROW_TOL * (1.0 + p.b_eq[i].abs()) {
                return Err(TrivialInfeasibility {
                    row: RowOrigin::Eq(i),
                    residual: rhs,
                });
            }
            continue;
        }
        let r = b.len();
        triplets.extend(scratch.iter().map(|&(k, v)| (r, k, v)));
        b.push(rhs);
        rows.push(RowOrigin::Eq(i));
    }

    let mut n = q.len();
    for i in 0..p.c_in.nrows() {
        let (lo, hi) = (p.row_lower[i], p.row_upper[i]);
        if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
            continue;
        }
        let fixed = split(&mut p.c_in.row(i), &mut scratch);
        if scratch.iter().all(|&(_, v)| v == 0.0) {
            let tol = EMPTY_ROW_TOL * (1.0 + fixed.abs());
            if fixed < lo - tol || fixed > hi + tol {
                let residual = if fixed < lo { lo - fixed } else { fixed - hi };
                return Err(TrivialInfeasibility {
                    row: RowOrigin::Ineq { row: i, slack: None },
                    residual,
                });
            }
            continue;
        }
        let r = b.len();
        triplets.extend(scratch.iter().map(|&(k, v)| (r, k, v)));
        if lo == hi {
            b.push(lo - fixed);
            rows.push(RowOrigin::Ineq { row: i, slack: None });
        } else {
            // C x - w = fixed-part-free form: C_kept x - w = -fixed, lo <= w <= hi.
            triplets.push((r, n, -1.0));
            b.push(-fixed);
            q.push(0.0);
            c.push(0.0);
            lower.push(lo);
            upper.push(hi);
            rows.push(RowOrigin::Ineq {
                row: i,
                slack: Some(n),
            });
            n += 1;
        }
    }

    let m = b.len();
    let mut a = CsrMatrix::from_triplets(m, n, &triplets);
    let mut row_scale = vec![1.0; m];
    {
        let (ptr, _) = a.pattern();
        let ptr = ptr.to_vec();
        let vals = a.values_mut();
        for i in 0..m {
            let s = vals[ptr[i]..ptr[i + 1]]
                .iter()
                .fold(0.0f64, |acc, v| acc.max(v.abs()));
            if s > 0.0 {
                row_scale[i] = s;
                vals[ptr[i]..ptr[i + 1]].iter_mut().for_each(|v| *v /= s);
                b[i] /= s;
            }
        }
    }

    Ok(Reduced {
        n,
        q,
        c,
        offset,
        a,
        b,
        lower,
        upper,
        columns,
        rows,
        row_scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_columns_move_to_rhs() {
        // x0 + 2 x1 = 5 with x1 fixed at 1 -> x0 = 3 (row scaled by 1).
        let mut p = QpProblem::new(2)
            .with_equalities(CsrMatrix::from_triplets(1, 2, &[(0, 0, 1.0), (0, 1, 2.0)]), vec![5.0]);
        p.lower = vec![0.0, 1.0];
        p.upper = vec![10.0, 1.0];
        p.c = vec![0.0, 3.0];
        let r = reduce(&p).unwrap();
        assert_eq!(r.n, 1);
        assert_eq!(r.b, vec![3.0]);
        assert_eq!(r.offset, 3.0);
        assert_eq!(r.columns[1], ColumnMap::Fixed(1.0));
    }

    #[test]
    fn empty_infeasible_row_detected() {
        let mut p = QpProblem::new(1)
            .with_equalities(CsrMatrix::from_triplets(1, 1, &[(0, 0, 1.0)]), vec![2.0]);
        p.lower = vec![1.0];
        p.upper = vec![1.0];
        assert!(reduce(&p).is_err());
    }

    #[test]
    fn inequality_rows_get_slacks() {
        let p = QpProblem::new(2).with_inequalities(
            CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 4.0)]),
            vec![f64::NEG_INFINITY, 2.0],
            vec![1.0, 2.0],
        );
        let r = reduce(&p).unwrap();
        // One slack for the range row, none for the equality-like row.
        assert_eq!(r.n, 3);
        assert_eq!(r.b.len(), 2);
        assert_eq!(r.b[1], 0.5);
        assert_eq!(r.upper[2], 1.0);
    }
}
