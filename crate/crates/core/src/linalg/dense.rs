use super::LinalgError;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "matrix must be square");
            m.data[i * n..(i + 1) * n].copy_from_slice(row);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                self.data[i * self.n..(i + 1) * self.n]
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// How a factorization reacts to a tiny pivot.
#[derive(Debug, Clone, Copy)]
pub enum PivotPolicy<'a> {
    /// Report `Singular`.
    Strict,
    /// Replace pivots smaller than `eps` by `±delta`, with the sign taken from
    /// `signs` (the expected inertia of a quasi-definite matrix).
    Regularize {
        signs: &'a [i8],
        eps: f64,
        delta: f64,
    },
}

/// `K = L D Lᵀ` without pivoting, for symmetric quasi-definite `K`.
#[derive(Debug, Clone)]
pub struct DenseLdlt {
    n: usize,
    /// Strict lower triangle, row-major.
    l: Vec<f64>,
    d: Vec<f64>,
    regularized: usize,
}

impl DenseLdlt {
    pub fn factor(k: &DenseMatrix, policy: PivotPolicy) -> Result<Self, LinalgError> {
        let n = k.n;
        let scale = k.data.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        let mut l = vec![0.0; n * n];
        let mut d = vec![0.0; n];
        let mut w = vec![0.0; n];
        let mut regularized = 0;
        for j in 0..n {
            let mut dj = k[(j, j)];
            for p in 0..j {
                let ljp = l[j * n + p];
                w[p] = ljp * d[p];
                dj -= ljp * w[p];
            }
            match policy {
                PivotPolicy::Strict => {
                    if dj.abs() <= 1e-14 * scale || !dj.is_finite() {
                        return Err(LinalgError::Singular { pivot: j });
                    }
                }
                PivotPolicy::Regularize { signs, eps, delta } => {
                    let s = signs[j] as f64;
                    if !dj.is_finite() {
                        return Err(LinalgError::Singular { pivot: j });
                    }
                    if dj * s < eps {
                        dj = s * delta;
                        regularized += 1;
                    }
                }
            }
            d[j] = dj;
            let wj = &w[..j];
            for i in j + 1..n {
                let row = &l[i * n..i * n + j];
                let dot: f64 = row.iter().zip(wj).map(|(a, b)| a * b).sum();
                l[i * n + j] = (k[(i, j)] - dot) / dj;
            }
        }
        Ok(Self {
            n,
            l,
            d,
            regularized,
        })
    }

    pub fn regularized_pivots(&self) -> usize {
        self.regularized
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let row = &self.l[i * n..i * n + i];
            let s: f64 = row.iter().zip(&x[..i]).map(|(a, b)| a * b).sum();
            x[i] -= s;
        }
        for i in 0..n {
            x[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            let xi = x[i];
            for j in 0..i {
                x[j] -= self.l[i * n + j] * xi;
            }
        }
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Solves `K x = rhs` for symmetric quasi-definite `K` by dense LDLᵀ with
/// iterative refinement. Fails if a pivot vanishes or the refined residual
/// stays above `1e-10 (1 + ‖rhs‖∞)`.
pub fn factor_solve(k: &DenseMatrix, rhs: &[f64]) -> Result<Vec<f64>, LinalgError> {
    if rhs.len() != k.dim() {
        return Err(LinalgError::Dimension {
            expected: k.dim(),
            found: rhs.len(),
        });
    }
    let f = DenseLdlt::factor(k, PivotPolicy::Strict)?;
    let mut x = rhs.to_vec();
    f.solve_in_place(&mut x);
    let target = 1e-10 * (1.0 + inf_norm(rhs));
    for _ in 0..10 {
        let kx = k.mul_vec(&x);
        let r: Vec<f64> = rhs.iter().zip(&kx).map(|(b, a)| b - a).collect();
        let rn = inf_norm(&r);
        if !rn.is_finite() {
            break;
        }
        if rn <= target {
            return Ok(x);
        }
        let mut dx = r;
        f.solve_in_place(&mut dx);
        x.iter_mut().zip(&dx).for_each(|(a, b)| *a += b);
    }
    let kx = k.mul_vec(&x);
    let rn = inf_norm(&rhs.iter().zip(&kx).map(|(b, a)| b - a).collect::<Vec<_>>());
    if rn <= target {
        Ok(x)
    } else {
        Err(LinalgError::Inaccurate { residual: rn })
    }
}
