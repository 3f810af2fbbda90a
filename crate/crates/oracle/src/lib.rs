//! Small dense reference solvers used to cross-check the interior-point code.
//!
//! Everything here is deliberately naive: a tableau simplex with Bland's rule
//! and a primal active-set method for strictly convex diagonal QPs. Both are
//! exact enough on problems with a few dozen variables and share no code with
//! the solver under test.

mod active_set;
mod generate;
mod simplex;

pub use active_set::solve_qp;
pub use generate::{random_lp, random_qp};
pub use simplex::solve_lp;

/// `min ½ xᵀ diag(q) x + cᵀx` s.t. `A_eq x = b_eq`, `G x ≤ h`, `lower ≤ x ≤ upper`.
///
/// Bounds must be finite.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseQp {
    pub q: Vec<f64>,
    pub c: Vec<f64>,
    pub a_eq: Vec<Vec<f64>>,
    pub b_eq: Vec<f64>,
    pub g: Vec<Vec<f64>>,
    pub h: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl DenseQp {
    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        (0..self.n())
            .map(|j| 0.5 * self.q[j] * x[j] * x[j] + self.c[j] * x[j])
            .sum()
    }

    /// Largest violation of any constraint at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (row, b) in self.a_eq.iter().zip(&self.b_eq) {
            worst = worst.max((dot(row, x) - b).abs());
        }
        for (row, h) in self.g.iter().zip(&self.h) {
            worst = worst.max(dot(row, x) - h);
        }
        for j in 0..self.n() {
            worst = worst.max(self.lower[j] - x[j]).max(x[j] - self.upper[j]);
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Optimal { x: Vec<f64>, objective: f64 },
    Infeasible,
    Unbounded,
}

impl Outcome {
    pub fn objective(&self) -> Option<f64> {
        match self {
            Outcome::Optimal { objective, .. } => Some(*objective),
            _ => None,
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
