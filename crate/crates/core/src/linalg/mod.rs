//! Linear algebra kernels: CSR storage, dense and sparse LDLᵀ.

mod csr;
pub mod dense;
pub mod ordering;
pub mod sparse_ldl;

pub use csr::CsrMatrix;
pub use dense::{factor_solve, DenseLdlt, DenseMatrix, PivotPolicy};
pub use sparse_ldl::SparseLdlt;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("matrix is singular at pivot {pivot}")]
    Singular { pivot: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("iterative refinement stalled at residual {residual:e}")]
    Inaccurate { residual: f64 },
}

pub(crate) fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
