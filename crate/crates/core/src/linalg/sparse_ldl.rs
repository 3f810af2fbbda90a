//! Up-looking sparse LDLᵀ driven by the elimination tree, for quasi-definite
//! matrices factored without numerical pivoting.

use super::{ordering, LinalgError};

const NONE: usize = usize::MAX;

/// Symbolic analysis and numeric storage of `P K Pᵀ = L D Lᵀ`.
#[derive(Debug, Clone)]
pub struct SparseLdlt {
    n: usize,
    /// `perm[k]` is the original index at permuted position `k`.
    perm: Vec<usize>,
    /// Upper triangle of the permuted matrix, compressed by column.
    ap: Vec<usize>,
    ai: Vec<usize>,
    ax: Vec<f64>,
    etree: Vec<usize>,
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<f64>,
    d: Vec<f64>,
    dinv: Vec<f64>,
    /// Expected pivot signs in permuted order.
    signs: Vec<i8>,
    /// Where each input entry lands in `ax`.
    slots: Vec<usize>,
}

impl SparseLdlt {
    /// `entries` lists the structurally nonzero `(i, j)` positions of the upper or
    /// lower triangle (either orientation; duplicates allowed). Every diagonal
    /// must appear. `signs[i]` is +1 or -1, the expected sign of pivot `i`.
    pub fn analyze(n: usize, entries: &[(usize, usize)], signs: &[i8]) -> Result<Self, LinalgError> {
        if signs.len() != n {
            return Err(LinalgError::Dimension {
                expected: n,
                found: signs.len(),
            });
        }
        let mut has_diag = vec![false; n];
        let mut adj = vec![Vec::new(); n];
        for &(i, j) in entries {
            if i >= n || j >= n {
                return Err(LinalgError::Dimension {
                    expected: n,
                    found: i.max(j) + 1,
                });
            }
            if i == j {
                has_diag[i] = true;
            } else {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
        if let Some(i) = has_diag.iter().position(|h| !h) {
            return Err(LinalgError::Singular { pivot: i });
        }
        let perm = ordering::minimum_degree(adj);
        let mut iperm = vec![0; n];
        for (k, &p) in perm.iter().enumerate() {
            iperm[p] = k;
        }

        // Permuted upper triangle: column = larger index.
        let mut cols: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for (e, &(i, j)) in entries.iter().enumerate() {
            let (a, b) = (iperm[i], iperm[j]);
            let (row, col) = if a <= b { (a, b) } else { (b, a) };
            cols[col].push((row, e));
        }
        let mut ap = Vec::with_capacity(n + 1);
        let mut ai = Vec::new();
        let mut slots = vec![0; entries.len()];
        ap.push(0);
        for col in cols.iter_mut() {
            col.sort_unstable();
            let mut last = NONE;
            for &(row, e) in col.iter() {
                if row != last {
                    ai.push(row);
                    last = row;
                }
                slots[e] = ai.len() - 1;
            }
            ap.push(ai.len());
        }

        // Elimination tree and column counts of L.
        let mut etree = vec![NONE; n];
        let mut lnz = vec![0usize; n];
        let mut work = vec![NONE; n];
        for j in 0..n {
            work[j] = j;
            for &i0 in &ai[ap[j]..ap[j + 1]] {
                let mut i = i0;
                if i == j {
                    continue;
                }
                while work[i] != j {
                    if etree[i] == NONE {
                        etree[i] = j;
                    }
                    lnz[i] += 1;
                    work[i] = j;
                    i = etree[i];
                }
            }
        }
        let mut lp = Vec::with_capacity(n + 1);
        lp.push(0);
        for j in 0..n {
            lp.push(lp[j] + lnz[j]);
        }
        let total = lp[n];
        let psigns = perm.iter().map(|&p| signs[p]).collect();
        Ok(Self {
            n,
            perm,
            ax: vec![0.0; ai.len()],
            ap,
            ai,
            etree,
            lp,
            li: vec![0; total],
            lx: vec![0.0; total],
            d: vec![0.0; n],
            dinv: vec![0.0; n],
            signs: psigns,
            slots,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn factor_nnz(&self) -> usize {
        self.lp[self.n]
    }

    /// Numeric factorization. `values[e]` belongs to `entries[e]` from `analyze`.
    /// Pivots whose signed value falls below `eps` are replaced by `±delta`;
    /// returns how many were.
    pub fn factor(&mut self, values: &[f64], eps: f64, delta: f64) -> Result<usize, LinalgError> {
        assert_eq!(values.len(), self.slots.len());
        self.ax.iter_mut().for_each(|v| *v = 0.0);
        for (e, &v) in values.iter().enumerate() {
            self.ax[self.slots[e]] += v;
        }
        let n = self.n;
        let mut y_vals = vec![0.0; n];
        let mut y_mark = vec![false; n];
        let mut y_idx = vec![0usize; n];
        let mut elim = vec![0usize; n];
        let mut next_space: Vec<usize> = self.lp[..n].to_vec();
        let mut regularized = 0;

        for k in 0..n {
            let mut nnz_y = 0;
            let mut dk = 0.0;
            for p in self.ap[k]..self.ap[k + 1] {
                let b = self.ai[p];
                if b == k {
                    dk = self.ax[p];
                    continue;
                }
                y_vals[b] = self.ax[p];
                if !y_mark[b] {
                    y_mark[b] = true;
                    elim[0] = b;
                    let mut nnz_e = 1;
                    let mut next = self.etree[b];
                    while next != NONE && next < k {
                        if y_mark[next] {
                            break;
                        }
                        y_mark[next] = true;
                        elim[nnz_e] = next;
                        nnz_e += 1;
                        next = self.etree[next];
                    }
                    while nnz_e > 0 {
                        nnz_e -= 1;
                        y_idx[nnz_y] = elim[nnz_e];
                        nnz_y += 1;
                    }
                }
            }
            for i in (0..nnz_y).rev() {
                let c = y_idx[i];
                let slot = next_space[c];
                let yc = y_vals[c];
                for j in self.lp[c]..slot {
                    y_vals[self.li[j]] -= self.lx[j] * yc;
                }
                self.li[slot] = k;
                let lkc = yc * self.dinv[c];
                self.lx[slot] = lkc;
                dk -= yc * lkc;
                next_space[c] += 1;
                y_vals[c] = 0.0;
                y_mark[c] = false;
            }
            if !dk.is_finite() {
                return Err(LinalgError::Singular {
                    pivot: self.perm[k],
                });
            }
            let s = self.signs[k] as f64;
            if dk * s < eps {
                dk = s * delta;
                regularized += 1;
            }
            self.d[k] = dk;
            self.dinv[k] = 1.0 / dk;
        }
        Ok(regularized)
    }

    /// Solves with the current factorization; `x` holds the rhs in original order.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.n;
        let mut w: Vec<f64> = self.perm.iter().map(|&p| x[p]).collect();
        for i in 0..n {
            let wi = w[i];
            for j in self.lp[i]..self.lp[i + 1] {
                w[self.li[j]] -= self.lx[j] * wi;
            }
        }
        for i in 0..n {
            w[i] *= self.dinv[i];
        }
        for i in (0..n).rev() {
            let mut wi = w[i];
            for j in self.lp[i]..self.lp[i + 1] {
                wi -= self.lx[j] * w[self.li[j]];
            }
            w[i] = wi;
        }
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = w[k];
        }
    }
}
