//! Best-bound branch-and-bound over charge/V2G exclusivity pairs.
//!
//! Each node is the relaxation with some pairs fixed to one side. Nodes are
//! solved when popped, so a node's stored bound is its parent's objective
//! until it is processed.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::par::Pool;
use crate::qp::{Branch, ExclusivityPair, QpError, QpProblem};
use crate::qpsolver::{solve_qp, QpSolution, QpStatus, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BnbOptions {
    pub gap_tol: f64,
    pub node_limit: usize,
    /// A pair counts as violated when both powers exceed this (p.u.).
    pub power_tol: f64,
    /// Nodes solved per batch; 1 gives plain sequential best-bound search.
    pub workers: usize,
    /// Snap near-bound columns of the incumbent and re-solve.
    pub polish: bool,
    pub solver: SolverOptions,
}

impl Default for BnbOptions {
    fn default() -> Self {
        Self {
            gap_tol: 1e-4,
            node_limit: 100_000,
            power_tol: 1e-6,
            workers: 1,
            polish: true,
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BnbStatus {
    /// The open-node pool was exhausted.
    Proven,
    /// Stopped with open nodes whose bounds are all within the gap tolerance.
    GapLimit,
    NodeLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub node: usize,
    pub depth: usize,
    pub bound: f64,
    pub incumbent: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BnbResult {
    pub status: BnbStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub bound: f64,
    pub gap: f64,
    pub nodes: usize,
    pub qp_iterations: usize,
    pub fixings: Vec<(ExclusivityPair, Branch)>,
    pub polished: bool,
    pub log: Vec<NodeRecord>,
}

impl BnbResult {
    pub fn write_log_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        w.write_record(["node", "depth", "bound", "incumbent", "gap"])?;
        for r in &self.log {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BnbError {
    #[error("the root relaxation is infeasible")]
    Infeasible,
    #[error("the root relaxation is unbounded")]
    Unbounded,
    #[error("QP solver stopped with status {0:?}")]
    Solver(QpStatus),
    #[error("node limit reached before any integral point was found")]
    NoIncumbent,
    #[error(transparent)]
    Qp(#[from] QpError),
}

/// The violated pair with the largest `min(p_ch, p_v2g)`, ties to the lowest
/// `(ev, hour)`.
pub fn select_branch(x: &[f64], pairs: &[ExclusivityPair], power_tol: f64) -> Option<ExclusivityPair> {
    let mut best: Option<(f64, ExclusivityPair)> = None;
    for p in pairs {
        let v = x[p.col_ch].min(x[p.col_v2g]);
        if v <= power_tol {
            continue;
        }
        let better = match &best {
            None => true,
            Some((bv, bp)) => v > *bv || (v == *bv && (p.ev, p.hour) < (bp.ev, bp.hour)),
        };
        if better {
            best = Some((v, *p));
        }
    }
    best.map(|(_, p)| p)
}

fn gap(best: f64, bound: f64) -> f64 {
    ((best - bound) / best.abs().max(1.0)).max(0.0)
}

struct Node {
    id: usize,
    depth: usize,
    bound: f64,
    problem: QpProblem,
    fixings: Vec<(ExclusivityPair, Branch)>,
}

/// Heap order: lowest bound first, then deepest, then oldest.
struct Ranked(Node);

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Ranked {}
impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .bound
            .total_cmp(&self.0.bound)
            .then(self.0.depth.cmp(&other.0.depth))
            .then(other.0.id.cmp(&self.0.id))
    }
}

struct Incumbent {
    objective: f64,
    x: Vec<f64>,
    /// Bound multipliers of the incumbent's QP, positive at a lower bound.
    z: Vec<f64>,
    problem: QpProblem,
    fixings: Vec<(ExclusivityPair, Branch)>,
}

/// Relative slack allowed when checking that a child bound does not drop
/// below its parent's. A solve's objective is only accurate to about the
/// solver tolerance times the cost scale, so that term is added on top.
const BOUND_SLACK: f64 = 1e-6;

pub fn solve_miqp(problem: &QpProblem, opts: &BnbOptions) -> Result<BnbResult, BnbError> {
    problem.validate()?;
    let pool = Pool::new(opts.workers.max(1));
    let solve = |p: &QpProblem| solve_qp(p, &opts.solver);

    let root = solve(problem)?;
    match root.status {
        QpStatus::Optimal => {}
        QpStatus::Infeasible => return Err(BnbError::Infeasible),
        QpStatus::Unbounded => return Err(BnbError::Unbounded),
        s => return Err(BnbError::Solver(s)),
    }
    let mut qp_iterations = root.iterations;
    let mut incumbent: Option<Incumbent> = None;

    // Root heuristic: zero the smaller side of every violated pair.
    let violated: Vec<ExclusivityPair> = problem
        .pairs
        .iter()
        .filter(|p| root.x[p.col_ch].min(root.x[p.col_v2g]) > opts.power_tol)
        .copied()
        .collect();
    if !violated.is_empty() {
        let mut p = problem.clone();
        let mut fixings = Vec::new();
        for pair in &violated {
            let branch = if root.x[pair.col_ch] < root.x[pair.col_v2g] {
                Branch::V2gOnly
            } else {
                Branch::ChargeOnly
            };
            p = p.fix_pair(pair, branch)?;
            fixings.push((*pair, branch));
        }
        let s = solve(&p)?;
        qp_iterations += s.iterations;
        if s.is_optimal() && select_branch(&s.x, &p.pairs, opts.power_tol).is_none() {
            log::debug!("root heuristic incumbent {}", s.objective);
            incumbent = Some(Incumbent {
                objective: s.objective,
                x: s.x,
                z: s.z_bounds,
                problem: p,
                fixings,
            });
        }
    }

    let mut heap = BinaryHeap::new();
    let mut next_id = 1usize;
    let mut nodes = 1usize;
    let mut log_rows = Vec::new();
    let mut pruned_min = f64::INFINITY;
    let mut stopped: Option<BnbStatus> = None;

    let cost_scale = 1.0 + problem.c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    // The root is already solved; process it like any other node.
    let mut batch: Vec<(Node, QpSolution)> = vec![(
        Node {
            id: 0,
            depth: 0,
            bound: root.objective,
            problem: problem.clone(),
            fixings: Vec::new(),
        },
        root,
    )];
    loop {
        for (node, sol) in batch.drain(..) {
            let best = incumbent.as_ref().map_or(f64::INFINITY, |i| i.objective);
            match sol.status {
                QpStatus::Optimal => {}
                QpStatus::Infeasible => continue,
                s => return Err(BnbError::Solver(s)),
            }
            let slack = (BOUND_SLACK + opts.solver.tol * cost_scale) * sol.objective.abs().max(1.0);
            debug_assert!(
                sol.objective >= node.bound - slack,
                "child bound {} below parent {}",
                sol.objective,
                node.bound
            );
            let bound = sol.objective.max(node.bound);
            let open_min = heap
                .peek()
                .map_or(f64::INFINITY, |r: &Ranked| r.0.bound)
                .min(bound);
            log_rows.push(NodeRecord {
                node: node.id,
                depth: node.depth,
                bound,
                incumbent: best,
                gap: gap(best, open_min.min(pruned_min)),
            });
            let tol_abs = opts.gap_tol * best.abs().max(1.0);
            if bound >= best - tol_abs {
                pruned_min = pruned_min.min(bound);
                continue;
            }
            match select_branch(&sol.x, &node.problem.pairs, opts.power_tol) {
                None => {
                    incumbent = Some(Incumbent {
                        objective: sol.objective,
                        x: sol.x,
                        z: sol.z_bounds,
                        problem: node.problem,
                        fixings: node.fixings,
                    });
                }
                Some(pair) => {
                    for branch in [Branch::ChargeOnly, Branch::V2gOnly] {
                        let mut fixings = node.fixings.clone();
                        fixings.push((pair, branch));
                        heap.push(Ranked(Node {
                            id: next_id,
                            depth: node.depth + 1,
                            bound,
                            problem: node.problem.fix_pair(&pair, branch)?,
                            fixings,
                        }));
                        next_id += 1;
                    }
                }
            }
        }

        let best = incumbent.as_ref().map_or(f64::INFINITY, |i| i.objective);
        let Some(top) = heap.peek() else { break };
        if top.0.bound >= best - opts.gap_tol * best.abs().max(1.0) {
            stopped = Some(BnbStatus::GapLimit);
            break;
        }
        if nodes >= opts.node_limit {
            stopped = Some(BnbStatus::NodeLimit);
            break;
        }
        let take = pool.workers().min(opts.node_limit - nodes).max(1);
        let popped: Vec<Node> = (0..take).filter_map(|_| heap.pop().map(|r| r.0)).collect();
        nodes += popped.len();
        let sols = pool.map(&popped, |n| solve(&n.problem));
        for (node, sol) in popped.into_iter().zip(sols) {
            let sol = sol?;
            qp_iterations += sol.iterations;
            batch.push((node, sol));
        }
    }

    let Some(mut inc) = incumbent else {
        return Err(BnbError::NoIncumbent);
    };
    let open_min = heap.peek().map_or(f64::INFINITY, |r| r.0.bound);
    let bound = inc.objective.min(pruned_min).min(open_min);
    let status = match stopped {
        None => BnbStatus::Proven,
        Some(BnbStatus::GapLimit) if heap.is_empty() => BnbStatus::Proven,
        Some(s) => s,
    };

    let mut polished = false;
    if opts.polish {
        if let Some((x, obj)) = polish(&inc.problem, &inc.x, &inc.z, inc.objective, opts) {
            inc.x = x;
            inc.objective = obj;
            polished = true;
        }
    }
    Ok(BnbResult {
        status,
        gap: gap(inc.objective, bound),
        objective: inc.objective,
        bound: bound.min(inc.objective),
        x: inc.x,
        nodes,
        qp_iterations,
        fixings: inc.fixings,
        polished,
        log: log_rows,
    })
}

/// Absolute distance (p.u.) under which an incumbent column is moved onto its bound.
const SNAP_TOL: f64 = 1e-6;

/// Columns judged to sit at a bound, with that bound.
///
/// With `by_dual` a column counts as active when its distance to the bound is
/// below the bound multiplier, the usual primal-dual activity indicator. This
/// catches degenerate ties where the interior iterate settles at
/// `sqrt(mu / q)` above the bound. Otherwise only [`SNAP_TOL`] is used.
fn active_bounds(p: &QpProblem, x: &[f64], z: &[f64], by_dual: bool) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    for j in 0..p.n {
        let (l, u) = (p.lower[j], p.upper[j]);
        if l == u {
            continue;
        }
        let (dl, du) = (x[j] - l, u - x[j]);
        let near = |d: f64, mult: f64| d <= SNAP_TOL || (by_dual && d < mult);
        if l.is_finite() && near(dl, z[j]) {
            out.push((j, l));
        } else if u.is_finite() && near(du, -z[j]) {
            out.push((j, u));
        }
    }
    out
}

/// Fixes the incumbent's active columns at their bounds and re-solves.
/// Accepted only if the result is integral and no worse than the incumbent
/// beyond ten solver tolerances, so the polished point is an equally optimal
/// point with exact values where the interior iterate only approached them.
/// The dual indicator is tried first, then the plain distance rule.
fn polish(
    p: &QpProblem,
    x: &[f64],
    z: &[f64],
    objective: f64,
    opts: &BnbOptions,
) -> Option<(Vec<f64>, f64)> {
    let slack = 10.0 * opts.solver.tol * objective.abs().max(1.0);
    let mut tried: Option<Vec<(usize, f64)>> = None;
    for by_dual in [true, false] {
        let active = active_bounds(p, x, z, by_dual);
        if active.is_empty() || tried.as_ref() == Some(&active) {
            continue;
        }
        let mut fixed = p.clone();
        for &(j, v) in &active {
            fixed.lower[j] = v;
            fixed.upper[j] = v;
        }
        let accepted = solve_qp(&fixed, &opts.solver).ok().filter(|s| {
            s.is_optimal()
                && s.objective <= objective + slack
                && select_branch(&s.x, &p.pairs, opts.power_tol).is_none()
        });
        log::debug!(
            "polish: {} columns fixed (dual rule {by_dual}), accepted {}",
            active.len(),
            accepted.is_some()
        );
        if let Some(s) = accepted {
            return Some((s.x, s.objective));
        }
        tried = Some(active);
    }
    None
}

#[cfg(test)]
mod tests;
