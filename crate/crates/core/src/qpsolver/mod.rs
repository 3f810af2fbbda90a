//! Primal-dual interior-point solver for [`QpProblem`].
//!
//! Mehrotra predictor-corrector on the bounded form produced by the presolve,
//! with static plus dynamic regularization of the KKT system and iterative
//! refinement. Infeasibility is suspected from diverging duals or stalled
//! steps and then confirmed by an elastic phase-1 solve.

mod kkt;
mod presolve;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::linalg::{dot, inf_norm, CsrMatrix};
use crate::qp::{QpError, QpProblem};
use kkt::KktSystem;
use presolve::{ColumnMap, Reduced, RowOrigin};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum KktBackend {
    /// Dense for small systems, sparse otherwise.
    #[default]
    Auto,
    Dense,
    Sparse,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub regularization: f64,
    pub backend: KktBackend,
    /// Keep one [`IterationRecord`] per iteration.
    pub trace: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 100,
            regularization: 1e-9,
            backend: KktBackend::Auto,
            trace: false,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<(), QpError> {
        if !(self.tol > 0.0) {
            return Err(QpError::Inconsistent("tol must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(QpError::Inconsistent("max_iter must be at least 1".into()));
        }
        if !(self.regularization >= 0.0) {
            return Err(QpError::Inconsistent("regularization must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterLimit,
    /// The KKT system could not be solved accurately enough to continue.
    Numerical,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct KktResiduals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub primal_res: f64,
    pub dual_res: f64,
    pub gap: f64,
    pub mu: f64,
    pub step: f64,
    /// Scaled primal and dual infeasibility plus scaled mean complementarity;
    /// non-increasing over accepted steps.
    pub merit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QpSolution {
    pub status: QpStatus,
    pub x: Vec<f64>,
    /// Multipliers of the equality rows.
    pub y: Vec<f64>,
    /// Bound multipliers (lower minus upper) per column.
    pub z_bounds: Vec<f64>,
    /// Multipliers of the general inequality rows.
    pub z_rows: Vec<f64>,
    pub objective: f64,
    pub dual_objective: f64,
    pub residuals: KktResiduals,
    pub iterations: usize,
    /// Farkas ray over the equality rows (infeasible) or descent ray in x (unbounded).
    pub certificate: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<IterationRecord>,
}

impl QpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == QpStatus::Optimal
    }

    pub fn write_trace_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        w.write_record(["iter", "primal_res", "dual_res", "gap", "mu", "step", "merit"])?;
        for r in &self.trace {
            w.serialize((r.iter, r.primal_res, r.dual_res, r.gap, r.mu, r.step, r.merit))?;
        }
        w.flush()?;
        Ok(())
    }
}

const STEP_FRACTION: f64 = 0.995;
/// Duals beyond this multiple of `1 + ‖c‖∞` are taken as a sign of infeasibility.
const DUAL_DIVERGENCE: f64 = 1e9;
/// Primal iterates beyond this multiple of the data scale trigger the unboundedness test.
const PRIMAL_DIVERGENCE: f64 = 1e9;
const STALL_STEP: f64 = 1e-8;
const STALL_ITERS: usize = 8;

pub fn solve_qp(problem: &QpProblem, opts: &SolverOptions) -> Result<QpSolution, QpError> {
    problem.validate()?;
    opts.validate()?;
    let red = match presolve::reduce(problem) {
        Ok(r) => r,
        Err(bad) => {
            let mut cert = vec![0.0; problem.b_eq.len()];
            if let RowOrigin::Eq(i) = bad.row {
                cert[i] = bad.residual.signum();
            }
            return Ok(empty_solution(problem, QpStatus::Infeasible, Some(cert)));
        }
    };
    let out = ipm(&red, opts, false);
    if matches!(out.status, QpStatus::IterLimit | QpStatus::Numerical) {
        if let Some(ray) = phase_one(&red, opts) {
            let mut sol = recover(problem, &red, &out, QpStatus::Infeasible);
            sol.certificate = Some(map_row_vector(problem, &red, &ray));
            return Ok(sol);
        }
        if let Some(d) = descent_ray(&red, opts) {
            let mut sol = recover(problem, &red, &out, QpStatus::Unbounded);
            sol.certificate = Some(map_column_vector(problem, &red, &d));
            return Ok(sol);
        }
    }
    let mut sol = recover(problem, &red, &out, out.status);
    if out.status == QpStatus::Unbounded {
        sol.certificate = out.ray.as_ref().map(|d| map_column_vector(problem, &red, d));
    }
    Ok(sol)
}

fn empty_solution(p: &QpProblem, status: QpStatus, cert: Option<Vec<f64>>) -> QpSolution {
    QpSolution {
        status,
        x: vec![0.0; p.n],
        y: vec![0.0; p.b_eq.len()],
        z_bounds: vec![0.0; p.n],
        z_rows: vec![0.0; p.row_lower.len()],
        objective: f64::NAN,
        dual_objective: f64::NAN,
        residuals: KktResiduals::default(),
        iterations: 0,
        certificate: cert,
        trace: Vec::new(),
    }
}

struct IpmOutcome {
    status: QpStatus,
    z: Vec<f64>,
    y: Vec<f64>,
    lam_l: Vec<f64>,
    lam_u: Vec<f64>,
    residuals: KktResiduals,
    dobj: f64,
    iterations: usize,
    trace: Vec<IterationRecord>,
    ray: Option<Vec<f64>>,
}

struct Residuals {
    rp: Vec<f64>,
    rd: Vec<f64>,
}

fn residuals(red: &Reduced, z: &[f64], y: &[f64], ll: &[f64], lu: &[f64]) -> Residuals {
    let az = red.a.mul_vec(z);
    let rp = az.iter().zip(&red.b).map(|(a, b)| a - b).collect();
    let aty = red.a.mul_t_vec(y);
    let rd = (0..red.n)
        .map(|j| red.q[j] * z[j] + red.c[j] - aty[j] - ll[j] + lu[j])
        .collect();
    Residuals { rp, rd }
}

/// Largest `α ≤ 1` keeping `v + α dv ≥ 0` on the masked entries.
fn max_step(v: &[f64], dv: &[f64], mask: &[bool], mut alpha: f64) -> f64 {
    for j in 0..v.len() {
        if mask[j] && dv[j] < 0.0 {
            alpha = alpha.min(-v[j] / dv[j]);
        }
    }
    alpha
}

fn ipm(red: &Reduced, opts: &SolverOptions, phase1: bool) -> IpmOutcome {
    let n = red.n;
    let m = red.b.len();
    let has_l: Vec<bool> = red.lower.iter().map(|v| v.is_finite()).collect();
    let has_u: Vec<bool> = red.upper.iter().map(|v| v.is_finite()).collect();
    let ncomp = has_l.iter().filter(|&&h| h).count() + has_u.iter().filter(|&&h| h).count();
    let scale_b = 1.0 + inf_norm(&red.b);
    let scale_c = 1.0 + inf_norm(&red.c);
    let bound_scale = red
        .lower
        .iter()
        .chain(&red.upper)
        .filter(|v| v.is_finite())
        .fold(scale_b, |m, v| m.max(v.abs()));

    // Starting point: 0 projected into the box shrunk by min(half width, 1).
    let mut z = vec![0.0; n];
    let mut sl = vec![0.0; n];
    let mut su = vec![0.0; n];
    for j in 0..n {
        let (l, u) = (red.lower[j], red.upper[j]);
        let margin = if has_l[j] && has_u[j] {
            (0.5 * (u - l)).min(1.0)
        } else {
            1.0
        };
        let mut v = 0.0f64;
        if has_l[j] {
            v = v.max(l + margin);
        }
        if has_u[j] {
            v = v.min(u - margin);
        }
        z[j] = v;
        sl[j] = if has_l[j] { v - l } else { 0.0 };
        su[j] = if has_u[j] { u - v } else { 0.0 };
    }
    let mu0 = scale_c.max(1.0);
    let mut ll: Vec<f64> = (0..n)
        .map(|j| if has_l[j] { mu0 / sl[j] } else { 0.0 })
        .collect();
    let mut lu: Vec<f64> = (0..n)
        .map(|j| if has_u[j] { mu0 / su[j] } else { 0.0 })
        .collect();
    let mut y = vec![0.0; m];

    let mut trace = Vec::new();
    let mut iter = 0usize;
    macro_rules! finish {
        ($status:expr, $res:expr, $_pobj:expr, $dobj:expr, $ray:expr) => {
            return IpmOutcome {
                status: $status,
                z,
                y,
                lam_l: ll,
                lam_u: lu,
                residuals: $res,
                dobj: $dobj,
                iterations: iter,
                trace,
                ray: $ray,
            }
        };
    }

    let free: Vec<bool> = (0..n).map(|j| !has_l[j] && !has_u[j] && red.q[j] == 0.0).collect();
    let mut kkt = match KktSystem::new(&red.a, opts.backend, opts.regularization, &free) {
        Ok(k) => k,
        Err(_) => {
            finish!(QpStatus::Numerical, KktResiduals::default(), f64::NAN, f64::NAN, None)
        }
    };

    let mut stalled = 0usize;
    let mut last_merit = f64::INFINITY;
    let mut last_dz: Option<Vec<f64>> = None;
    loop {
        let res = residuals(red, &z, &y, &ll, &lu);
        let comp: f64 = (0..n)
            .map(|j| {
                (if has_l[j] { sl[j] * ll[j] } else { 0.0 })
                    + (if has_u[j] { su[j] * lu[j] } else { 0.0 })
            })
            .sum();
        let mu = if ncomp > 0 { comp / ncomp as f64 } else { 0.0 };
        let quad: f64 = (0..n).map(|j| 0.5 * red.q[j] * z[j] * z[j]).sum();
        let pobj = quad + dot(&red.c, &z);
        let dobj = -quad
            + dot(&red.b, &y)
            + (0..n)
                .map(|j| {
                    (if has_l[j] { red.lower[j] * ll[j] } else { 0.0 })
                        - (if has_u[j] { red.upper[j] * lu[j] } else { 0.0 })
                })
                .sum::<f64>();
        let pres = inf_norm(&res.rp) / scale_b;
        let dres = inf_norm(&res.rd) / scale_c;
        let gap = (pobj - dobj).abs().max(comp) / (1.0 + pobj.abs());
        let merit = pres + dres + mu / scale_c;
        let kres = KktResiduals {
            primal: pres,
            dual: dres,
            gap,
        };

        if pres <= opts.tol && dres <= opts.tol && gap <= opts.tol {
            finish!(QpStatus::Optimal, kres, pobj, dobj, None);
        }
        if iter >= opts.max_iter {
            finish!(QpStatus::IterLimit, kres, pobj, dobj, None);
        }

        // Divergence tests.
        let dual_norm = inf_norm(&y).max(inf_norm(&ll)).max(inf_norm(&lu));
        if !phase1 && pres > opts.tol && dual_norm > DUAL_DIVERGENCE * scale_c {
            finish!(QpStatus::IterLimit, kres, pobj, dobj, None);
        }
        if inf_norm(&z) > PRIMAL_DIVERGENCE * bound_scale {
            if let Some(d) = last_dz.as_ref().and_then(|d| unbounded_ray(red, d, &has_l, &has_u)) {
                finish!(QpStatus::Unbounded, kres, pobj, dobj, Some(d));
            }
        }

        let h: Vec<f64> = (0..n)
            .map(|j| {
                red.q[j]
                    + (if has_l[j] { ll[j] / sl[j] } else { 0.0 })
                    + (if has_u[j] { lu[j] / su[j] } else { 0.0 })
            })
            .collect();
        if kkt.factor(&h).is_err() {
            finish!(QpStatus::Numerical, kres, pobj, dobj, None);
        }

        let direction = |rcl: &[f64], rcu: &[f64]| {
            let mut rhs = vec![0.0; n + m];
            for j in 0..n {
                let mut v = -res.rd[j];
                if has_l[j] {
                    v += rcl[j] / sl[j];
                }
                if has_u[j] {
                    v -= rcu[j] / su[j];
                }
                rhs[j] = v;
            }
            for i in 0..m {
                rhs[n + i] = -res.rp[i];
            }
            let (sol, _) = kkt.solve(&rhs);
            let dz = sol[..n].to_vec();
            let dy: Vec<f64> = sol[n..].iter().map(|v| -v).collect();
            let dll: Vec<f64> = (0..n)
                .map(|j| {
                    if has_l[j] {
                        (rcl[j] - ll[j] * dz[j]) / sl[j]
                    } else {
                        0.0
                    }
                })
                .collect();
            let dlu: Vec<f64> = (0..n)
                .map(|j| {
                    if has_u[j] {
                        (rcu[j] + lu[j] * dz[j]) / su[j]
                    } else {
                        0.0
                    }
                })
                .collect();
            (dz, dy, dll, dlu)
        };
        let neg_dz = |dz: &[f64]| dz.iter().map(|v| -v).collect::<Vec<_>>();
        let step_len = |dz: &[f64], dll: &[f64], dlu: &[f64]| {
            let mut a = max_step(&sl, dz, &has_l, 1.0 / STEP_FRACTION);
            a = max_step(&su, &neg_dz(dz), &has_u, a);
            a = max_step(&ll, dll, &has_l, a);
            max_step(&lu, dlu, &has_u, a)
        };

        // Predictor.
        let rcl0: Vec<f64> = (0..n).map(|j| -sl[j] * ll[j]).collect();
        let rcu0: Vec<f64> = (0..n).map(|j| -su[j] * lu[j]).collect();
        let (dz_a, _dy_a, dll_a, dlu_a) = direction(&rcl0, &rcu0);
        let alpha_aff = step_len(&dz_a, &dll_a, &dlu_a).min(1.0);
        let sigma = if ncomp > 0 && mu > 0.0 {
            let mu_aff: f64 = (0..n)
                .map(|j| {
                    (if has_l[j] {
                        (sl[j] + alpha_aff * dz_a[j]) * (ll[j] + alpha_aff * dll_a[j])
                    } else {
                        0.0
                    }) + (if has_u[j] {
                        (su[j] - alpha_aff * dz_a[j]) * (lu[j] + alpha_aff * dlu_a[j])
                    } else {
                        0.0
                    })
                })
                .sum::<f64>()
                / ncomp as f64;
            (mu_aff / mu).clamp(0.0, 1.0).powi(3)
        } else {
            0.0
        };

        // Corrector.
        let rcl: Vec<f64> = (0..n)
            .map(|j| sigma * mu - sl[j] * ll[j] - dz_a[j] * dll_a[j])
            .collect();
        let rcu: Vec<f64> = (0..n)
            .map(|j| sigma * mu - su[j] * lu[j] + dz_a[j] * dlu_a[j])
            .collect();
        let (dz, dy, dll, dlu) = direction(&rcl, &rcu);
        let alpha = (STEP_FRACTION * step_len(&dz, &dll, &dlu)).min(1.0);

        // Accept only steps that do not increase the merit. If the corrector
        // cannot, fall back to the first-order centred direction, along which
        // every merit term decreases for short enough steps.
        let merit_limit = last_merit.min(merit) * (1.0 + 1e-6) + 1e-13;
        let trial = |dz: &[f64], dy: &[f64], dll: &[f64], dlu: &[f64], mut alpha: f64, halvings: usize| {
            for _ in 0..halvings {
                let zt: Vec<f64> = (0..n).map(|j| z[j] + alpha * dz[j]).collect();
                let yt: Vec<f64> = (0..m).map(|i| y[i] + alpha * dy[i]).collect();
                let llt: Vec<f64> = (0..n).map(|j| ll[j] + alpha * dll[j]).collect();
                let lut: Vec<f64> = (0..n).map(|j| lu[j] + alpha * dlu[j]).collect();
                let rt = residuals(red, &zt, &yt, &llt, &lut);
                let comp_t: f64 = (0..n)
                    .map(|j| {
                        (if has_l[j] { (sl[j] + alpha * dz[j]) * llt[j] } else { 0.0 })
                            + (if has_u[j] { (su[j] - alpha * dz[j]) * lut[j] } else { 0.0 })
                    })
                    .sum();
                let mu_t = if ncomp > 0 { comp_t / ncomp as f64 } else { 0.0 };
                let mt = inf_norm(&rt.rp) / scale_b + inf_norm(&rt.rd) / scale_c + mu_t / scale_c;
                if mt <= merit_limit {
                    return Some((alpha, zt, yt, llt, lut, mt));
                }
                alpha *= 0.5;
            }
            None
        };
        let mut accepted = trial(&dz, &dy, &dll, &dlu, alpha, 8);
        let mut dz = dz;
        if accepted.is_none() {
            let sigma_f = sigma.max(0.1);
            let rcl: Vec<f64> = (0..n).map(|j| sigma_f * mu - sl[j] * ll[j]).collect();
            let rcu: Vec<f64> = (0..n).map(|j| sigma_f * mu - su[j] * lu[j]).collect();
            let (dzf, dyf, dllf, dluf) = direction(&rcl, &rcu);
            let alpha_f = (STEP_FRACTION * step_len(&dzf, &dllf, &dluf)).min(1.0);
            accepted = trial(&dzf, &dyf, &dllf, &dluf, alpha_f, 40);
            dz = dzf;
        }
        let Some((alpha, zt, yt, llt, lut, mt)) = accepted else {
            finish!(QpStatus::Numerical, kres, pobj, dobj, None);
        };
        for j in 0..n {
            if has_l[j] {
                sl[j] += alpha * dz[j];
            }
            if has_u[j] {
                su[j] -= alpha * dz[j];
            }
        }
        z = zt;
        y = yt;
        ll = llt;
        lu = lut;
        last_merit = mt;
        last_dz = Some(dz);
        iter += 1;
        if opts.trace {
            trace.push(IterationRecord {
                iter,
                primal_res: pres,
                dual_res: dres,
                gap,
                mu,
                step: alpha,
                merit: mt,
            });
        }

        if alpha < STALL_STEP {
            stalled += 1;
            if stalled >= STALL_ITERS && !phase1 {
                let res = residuals(red, &z, &y, &ll, &lu);
                let kres = KktResiduals {
                    primal: inf_norm(&res.rp) / scale_b,
                    dual: inf_norm(&res.rd) / scale_c,
                    gap,
                };
                finish!(QpStatus::IterLimit, kres, pobj, dobj, None);
            }
        } else {
            stalled = 0;
        }
    }
}

/// Checks whether `d` is a recession direction along which the objective decreases.
fn unbounded_ray(red: &Reduced, d: &[f64], has_l: &[bool], has_u: &[bool]) -> Option<Vec<f64>> {
    let norm = inf_norm(d);
    if norm == 0.0 || !norm.is_finite() {
        return None;
    }
    let d: Vec<f64> = d.iter().map(|v| v / norm).collect();
    let tol = 1e-7;
    let ad = red.a.mul_vec(&d);
    if inf_norm(&ad) > tol * (1.0 + red.a.max_abs()) {
        return None;
    }
    for j in 0..red.n {
        if (has_l[j] && d[j] < -tol) || (has_u[j] && d[j] > tol) || red.q[j] * d[j].abs() > tol {
            return None;
        }
    }
    if dot(&red.c, &d) < -tol * (1.0 + inf_norm(&red.c)) {
        Some(d)
    } else {
        None
    }
}

/// Minimizes total equality violation. Returns the multipliers as a Farkas
/// ray when the violation cannot be driven to zero.
fn phase_one(red: &Reduced, opts: &SolverOptions) -> Option<Vec<f64>> {
    let n = red.n;
    let m = red.b.len();
    if m == 0 {
        return None;
    }
    let mut trip: Vec<(usize, usize, f64)> = red.a.triplets().collect();
    for i in 0..m {
        trip.push((i, n + i, 1.0));
        trip.push((i, n + m + i, -1.0));
    }
    let total = n + 2 * m;
    let a = CsrMatrix::from_triplets(m, total, &trip);
    let mut lower = red.lower.clone();
    lower.extend(std::iter::repeat_n(0.0, 2 * m));
    let mut upper = red.upper.clone();
    upper.extend(std::iter::repeat_n(f64::INFINITY, 2 * m));
    let mut c = vec![0.0; n];
    c.extend(std::iter::repeat_n(1.0, 2 * m));
    let elastic = Reduced {
        n: total,
        q: vec![0.0; total],
        c,
        offset: 0.0,
        a,
        b: red.b.clone(),
        lower,
        upper,
        columns: Vec::new(),
        rows: Vec::new(),
        row_scale: vec![1.0; m],
    };
    let phase_opts = SolverOptions {
        max_iter: opts.max_iter.max(100),
        trace: false,
        ..*opts
    };
    let res = ipm(&elastic, &phase_opts, true);
    let violation: f64 = res.z[n..].iter().sum();
    let threshold = (100.0 * opts.tol).max(1e-7) * (1.0 + inf_norm(&red.b));
    log::debug!(
        "phase one: status {:?}, violation {violation:e}, threshold {threshold:e}",
        res.status
    );
    if matches!(res.status, QpStatus::Optimal | QpStatus::IterLimit) && violation > threshold {
        Some(res.y)
    } else {
        None
    }
}

/// Searches the box `‖d‖∞ ≤ 1` of recession directions (`Ad = 0`, `Qd = 0`,
/// `d` pointing into the bounds) for one with `cᵀd < 0`.
fn descent_ray(red: &Reduced, opts: &SolverOptions) -> Option<Vec<f64>> {
    let n = red.n;
    let mut p = QpProblem::new(n).with_equalities(red.a.clone(), vec![0.0; red.b.len()]);
    p.c = red.c.clone();
    for j in 0..n {
        if red.q[j] > 0.0 {
            p.lower[j] = 0.0;
            p.upper[j] = 0.0;
        } else {
            p.lower[j] = if red.lower[j].is_finite() { 0.0 } else { -1.0 };
            p.upper[j] = if red.upper[j].is_finite() { 0.0 } else { 1.0 };
        }
    }
    let inner = presolve::reduce(&p).ok()?;
    if inner.n == 0 {
        return None;
    }
    let res = ipm(&inner, &SolverOptions { trace: false, ..*opts }, true);
    if res.status != QpStatus::Optimal {
        return None;
    }
    let d: Vec<f64> = (0..n)
        .map(|j| match inner.columns[j] {
            ColumnMap::Kept(k) => res.z[k],
            ColumnMap::Fixed(v) => v,
        })
        .collect();
    let slope = dot(&red.c, &d);
    log::debug!("descent ray slope {slope:e}");
    if slope < -(100.0 * opts.tol).max(1e-7) * (1.0 + inf_norm(&red.c)) {
        Some(d)
    } else {
        None
    }
}

fn map_row_vector(p: &QpProblem, red: &Reduced, v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.b_eq.len() + p.row_lower.len()];
    for (k, origin) in red.rows.iter().enumerate() {
        let val = v[k] / red.row_scale[k];
        match *origin {
            RowOrigin::Eq(i) => out[i] = val,
            RowOrigin::Ineq { row, .. } => out[p.b_eq.len() + row] = val,
        }
    }
    out
}

fn map_column_vector(p: &QpProblem, red: &Reduced, v: &[f64]) -> Vec<f64> {
    (0..p.n)
        .map(|j| match red.columns[j] {
            ColumnMap::Kept(k) => v[k],
            ColumnMap::Fixed(_) => 0.0,
        })
        .collect()
}

fn recover(p: &QpProblem, red: &Reduced, o: &IpmOutcome, status: QpStatus) -> QpSolution {
    let mut x: Vec<f64> = (0..p.n)
        .map(|j| match red.columns[j] {
            ColumnMap::Kept(k) => o.z[k],
            ColumnMap::Fixed(v) => v,
        })
        .collect();
    if status == QpStatus::Optimal {
        for j in 0..p.n {
            x[j] = x[j].clamp(p.lower[j], p.upper[j]);
        }
    }
    let mut y = vec![0.0; p.b_eq.len()];
    let mut z_rows = vec![0.0; p.row_lower.len()];
    for (k, origin) in red.rows.iter().enumerate() {
        let val = o.y[k] / red.row_scale[k];
        match *origin {
            RowOrigin::Eq(i) => y[i] = val,
            RowOrigin::Ineq { row, .. } => z_rows[row] = val,
        }
    }
    // Reduced costs give the bound multipliers, fixed columns included.
    let aty = p.a_eq.mul_t_vec(&y);
    let cty = p.c_in.mul_t_vec(&z_rows);
    let z_bounds = (0..p.n)
        .map(|j| match red.columns[j] {
            ColumnMap::Kept(k) => o.lam_l[k] - o.lam_u[k],
            ColumnMap::Fixed(_) => p.q[j] * x[j] + p.c[j] - aty[j] - cty[j],
        })
        .collect();
    QpSolution {
        status,
        objective: p.objective(&x),
        dual_objective: o.dobj + red.offset,
        x,
        y,
        z_bounds,
        z_rows,
        residuals: o.residuals,
        iterations: o.iterations,
        certificate: None,
        trace: o.trace.clone(),
    }
}

#[cfg(test)]
mod tests;
