//! Quasi-definite KKT system `[H + ρI, Aᵀ; A, -δI]` with refinement against the
//! unregularized matrix.
//!
//! Free columns (no bounds, no quadratic term) have pivot ρ alone. Eliminated
//! before the dual rows they put 1/ρ-sized entries into the dual block, whose
//! small pivots then cancel. The dense backend, which otherwise takes every
//! primal column first, therefore eliminates them last. The sparse backend
//! keeps its fill-reducing order.

use crate::linalg::{inf_norm, CsrMatrix, DenseLdlt, DenseMatrix, LinalgError, PivotPolicy, SparseLdlt};

use super::KktBackend;

const DYN_EPS: f64 = 1e-13;
const DYN_DELTA: f64 = 1e-7;
const DENSE_AUTO_LIMIT: usize = 300;
const REFINE_STEPS: usize = 12;

enum Factor {
    /// `order[k]` is the system index at elimination position `k`.
    Dense { ldlt: Option<DenseLdlt>, order: Vec<usize> },
    Sparse(SparseLdlt),
}

pub(crate) struct KktSystem<'a> {
    a: &'a CsrMatrix,
    n: usize,
    m: usize,
    reg: f64,
    h: Vec<f64>,
    entries: Vec<(usize, usize)>,
    factor: Factor,
}

impl<'a> KktSystem<'a> {
    /// `free[j]` marks primal columns whose diagonal is ρ at every iterate.
    pub fn new(
        a: &'a CsrMatrix,
        backend: KktBackend,
        reg: f64,
        free: &[bool],
    ) -> Result<Self, LinalgError> {
        let n = a.ncols();
        let m = a.nrows();
        let dim = n + m;
        let dense = match backend {
            KktBackend::Dense => true,
            KktBackend::Sparse => false,
            KktBackend::Auto => dim <= DENSE_AUTO_LIMIT,
        };
        let mut entries: Vec<(usize, usize)> = (0..dim).map(|i| (i, i)).collect();
        entries.extend(a.triplets().map(|(i, j, _)| (n + i, j)));
        let deferred = |i: usize| i < n && free[i];
        let factor = if dense {
            let mut order: Vec<usize> = (0..dim).collect();
            order.sort_by_key(|&i| deferred(i));
            Factor::Dense { ldlt: None, order }
        } else {
            let signs: Vec<i8> = (0..dim).map(|i| if i < n { 1 } else { -1 }).collect();
            Factor::Sparse(SparseLdlt::analyze(dim, &entries, &signs)?)
        };
        Ok(Self {
            a,
            n,
            m,
            reg,
            h: vec![0.0; n],
            entries,
            factor,
        })
    }

    /// Factors with primal diagonal `h` (Q plus barrier terms). Returns the
    /// number of dynamically regularized pivots.
    pub fn factor(&mut self, h: &[f64]) -> Result<usize, LinalgError> {
        self.h.copy_from_slice(h);
        let (n, m) = (self.n, self.m);
        let reg = self.reg;
        match &mut self.factor {
            Factor::Sparse(f) => {
                let mut values = Vec::with_capacity(self.entries.len());
                values.extend(h.iter().map(|v| v + reg));
                values.extend(std::iter::repeat_n(-reg, m));
                values.extend(self.a.values().iter().copied());
                f.factor(&values, DYN_EPS, DYN_DELTA)
            }
            Factor::Dense { ldlt: slot, order } => {
                let dim = n + m;
                let mut pos = vec![0; dim];
                for (k, &i) in order.iter().enumerate() {
                    pos[i] = k;
                }
                let mut k = DenseMatrix::zeros(dim);
                for i in 0..n {
                    k[(pos[i], pos[i])] = h[i] + reg;
                }
                for i in 0..m {
                    k[(pos[n + i], pos[n + i])] = -reg;
                }
                for (i, j, v) in self.a.triplets() {
                    k[(pos[n + i], pos[j])] = v;
                    k[(pos[j], pos[n + i])] = v;
                }
                let signs: Vec<i8> = order.iter().map(|&i| if i < n { 1 } else { -1 }).collect();
                let f = DenseLdlt::factor(
                    &k,
                    PivotPolicy::Regularize {
                        signs: &signs,
                        eps: DYN_EPS,
                        delta: DYN_DELTA,
                    },
                )?;
                let reg_count = f.regularized_pivots();
                *slot = Some(f);
                Ok(reg_count)
            }
        }
    }

    fn raw_solve(&self, x: &mut [f64]) {
        match &self.factor {
            Factor::Sparse(f) => f.solve_in_place(x),
            Factor::Dense { ldlt: Some(f), order } => {
                let mut y: Vec<f64> = order.iter().map(|&i| x[i]).collect();
                f.solve_in_place(&mut y);
                for (&i, v) in order.iter().zip(y) {
                    x[i] = v;
                }
            }
            Factor::Dense { ldlt: None, .. } => panic!("solve before factor"),
        }
    }

    /// `[H, Aᵀ; A, 0] v`
    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let (n, _) = (self.n, self.m);
        let (vx, vy) = v.split_at(n);
        let mut out = vec![0.0; v.len()];
        let aty = self.a.mul_t_vec(vy);
        for j in 0..n {
            out[j] = self.h[j] * vx[j] + aty[j];
        }
        let ax = self.a.mul_vec(vx);
        out[n..].copy_from_slice(&ax);
        out
    }

    /// Residual size used to steer refinement. Rows of primal columns are
    /// divided by `1 + h`, so columns with huge barrier terms are judged by the
    /// error they cause in the step rather than by their rounding floor.
    fn scaled_norm(&self, r: &[f64]) -> f64 {
        let (rx, ry) = r.split_at(self.n);
        let primal = rx
            .iter()
            .zip(&self.h)
            .fold(0.0f64, |m, (v, h)| m.max(v.abs() / (1.0 + h.abs())));
        primal.max(inf_norm(ry))
    }

    /// Solves and refines; returns the final scaled residual norm.
    pub fn solve(&self, rhs: &[f64]) -> (Vec<f64>, f64) {
        let mut x = rhs.to_vec();
        self.raw_solve(&mut x);
        let target = 1e-12 * (1.0 + self.scaled_norm(rhs));
        let residual = |x: &[f64]| -> Vec<f64> {
            let kx = self.apply(x);
            rhs.iter().zip(&kx).map(|(b, a)| b - a).collect()
        };
        let mut r = residual(&x);
        let mut rn = self.scaled_norm(&r);
        for _ in 0..REFINE_STEPS {
            if rn <= target || !rn.is_finite() {
                break;
            }
            let mut dx = r.clone();
            self.raw_solve(&mut dx);
            let cand: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + b).collect();
            let rc = residual(&cand);
            let rcn = self.scaled_norm(&rc);
            if !(rcn < rn) {
                break;
            }
            x = cand;
            r = rc;
            rn = rcn;
        }
        (x, rn)
    }
}
