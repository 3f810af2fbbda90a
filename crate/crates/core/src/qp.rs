//! Standard-form convex QP with a registry of charge/V2G exclusivity pairs.
//!
//! ```text
//! minimize    ½ xᵀ diag(q) x + cᵀx + offset
//! subject to  A x = b
//!             row_lower ≤ C x ≤ row_upper
//!             lower ≤ x ≤ upper
//! ```

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::linalg::CsrMatrix;

/// A (charge, V2G) column pair that may not both be positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExclusivityPair {
    pub ev: u32,
    pub hour: usize,
    pub col_ch: usize,
    pub col_v2g: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    ChargeOnly,
    V2gOnly,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QpError {
    #[error("pair (ev {ev}, hour {hour}) is not registered in this problem")]
    UnknownPair { ev: u32, hour: usize },
    #[error("{0}")]
    Inconsistent(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpProblem {
    pub n: usize,
    pub q: Vec<f64>,
    pub c: Vec<f64>,
    pub offset: f64,
    pub a_eq: Arc<CsrMatrix>,
    pub b_eq: Vec<f64>,
    pub c_in: Arc<CsrMatrix>,
    pub row_lower: Vec<f64>,
    pub row_upper: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub pairs: Vec<ExclusivityPair>,
}

impl QpProblem {
    /// An unconstrained problem over `n` free variables with zero objective.
    pub fn new(n: usize) -> Self {
        Self {
            n,
            q: vec![0.0; n],
            c: vec![0.0; n],
            offset: 0.0,
            a_eq: Arc::new(CsrMatrix::zeros(0, n)),
            b_eq: Vec::new(),
            c_in: Arc::new(CsrMatrix::zeros(0, n)),
            row_lower: Vec::new(),
            row_upper: Vec::new(),
            lower: vec![f64::NEG_INFINITY; n],
            upper: vec![f64::INFINITY; n],
            pairs: Vec::new(),
        }
    }

    pub fn with_equalities(mut self, a: CsrMatrix, b: Vec<f64>) -> Self {
        self.a_eq = Arc::new(a);
        self.b_eq = b;
        self
    }

    pub fn with_inequalities(mut self, c: CsrMatrix, lower: Vec<f64>, upper: Vec<f64>) -> Self {
        self.c_in = Arc::new(c);
        self.row_lower = lower;
        self.row_upper = upper;
        self
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        self.offset
            + x.iter()
                .zip(&self.q)
                .zip(&self.c)
                .map(|((xi, qi), ci)| 0.5 * qi * xi * xi + ci * xi)
                .sum::<f64>()
    }

    pub fn validate(&self) -> Result<(), QpError> {
        let bad = |m: &str| Err(QpError::Inconsistent(m.to_string()));
        let n = self.n;
        if self.q.len() != n || self.c.len() != n || self.lower.len() != n || self.upper.len() != n
        {
            return bad("vector lengths disagree with n");
        }
        if self.a_eq.ncols() != n || self.c_in.ncols() != n {
            return bad("constraint matrices have the wrong column count");
        }
        if self.a_eq.nrows() != self.b_eq.len() {
            return bad("equality rows and rhs disagree");
        }
        if self.c_in.nrows() != self.row_lower.len() || self.c_in.nrows() != self.row_upper.len() {
            return bad("inequality rows and bounds disagree");
        }
        if self.q.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return bad("quadratic diagonal must be finite and non-negative");
        }
        if self.c.iter().any(|v| !v.is_finite()) || self.b_eq.iter().any(|v| !v.is_finite()) {
            return bad("objective and rhs must be finite");
        }
        if self.lower.iter().zip(&self.upper).any(|(l, u)| !(l <= u)) {
            return bad("lower bound exceeds upper bound");
        }
        if self
            .row_lower
            .iter()
            .zip(&self.row_upper)
            .any(|(l, u)| !(l <= u))
        {
            return bad("row lower bound exceeds row upper bound");
        }
        for p in &self.pairs {
            if p.col_ch >= n || p.col_v2g >= n {
                return bad("exclusivity pair column out of range");
            }
        }
        Ok(())
    }

    /// Copy with one side of `pair` forced to zero and the pair dropped.
    pub fn fix_pair(&self, pair: &ExclusivityPair, branch: Branch) -> Result<QpProblem, QpError> {
        let pos = self
            .pairs
            .iter()
            .position(|p| p == pair)
            .ok_or(QpError::UnknownPair {
                ev: pair.ev,
                hour: pair.hour,
            })?;
        let mut out = self.clone();
        let col = match branch {
            Branch::ChargeOnly => pair.col_v2g,
            Branch::V2gOnly => pair.col_ch,
        };
        out.upper[col] = 0.0;
        out.lower[col] = out.lower[col].min(0.0);
        out.pairs.remove(pos);
        Ok(out)
    }

    /// Plain-text triplet dump for cross-checking with external tools.
    pub fn dump_triplets(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# qp n={} m_eq={} m_in={} offset={}",
            self.n,
            self.b_eq.len(),
            self.row_lower.len(),
            self.offset
        );
        let _ = writeln!(s, "[objective] col q c");
        for j in 0..self.n {
            if self.q[j] != 0.0 || self.c[j] != 0.0 {
                let _ = writeln!(s, "{} {} {}", j, self.q[j], self.c[j]);
            }
        }
        let _ = writeln!(s, "[bounds] col lower upper");
        for j in 0..self.n {
            let _ = writeln!(s, "{} {} {}", j, self.lower[j], self.upper[j]);
        }
        let _ = writeln!(s, "[eq] row col value");
        for (i, j, v) in self.a_eq.triplets() {
            let _ = writeln!(s, "{i} {j} {v}");
        }
        let _ = writeln!(s, "[eq_rhs] row b");
        for (i, b) in self.b_eq.iter().enumerate() {
            let _ = writeln!(s, "{i} {b}");
        }
        let _ = writeln!(s, "[ineq] row col value");
        for (i, j, v) in self.c_in.triplets() {
            let _ = writeln!(s, "{i} {j} {v}");
        }
        let _ = writeln!(s, "[ineq_bounds] row lower upper");
        for i in 0..self.row_lower.len() {
            let _ = writeln!(s, "{} {} {}", i, self.row_lower[i], self.row_upper[i]);
        }
        s
    }
}
