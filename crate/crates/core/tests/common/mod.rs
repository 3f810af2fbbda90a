#![allow(dead_code)]

use gridsched::linalg::CsrMatrix;
use gridsched::model::{parse_model, NetworkModel, ScenarioConfig};
use gridsched::qp::{Branch, QpProblem};
use gridsched::qpsolver::{solve_qp, SolverOptions};
use gridsched_oracle::DenseQp;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn dense_to_csr(rows: &[Vec<f64>], n: usize) -> CsrMatrix {
    let trip: Vec<(usize, usize, f64)> = rows
        .iter()
        .enumerate()
        .flat_map(|(i, r)| {
            r.iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(move |(j, v)| (i, j, *v))
        })
        .collect();
    CsrMatrix::from_triplets(rows.len(), n, &trip)
}

pub fn to_qp(d: &DenseQp) -> QpProblem {
    let n = d.n();
    let mut p = QpProblem::new(n)
        .with_equalities(dense_to_csr(&d.a_eq, n), d.b_eq.clone())
        .with_inequalities(
            dense_to_csr(&d.g, n),
            vec![f64::NEG_INFINITY; d.h.len()],
            d.h.clone(),
        );
    p.q = d.q.clone();
    p.c = d.c.clone();
    p.lower = d.lower.clone();
    p.upper = d.upper.clone();
    p
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

/// A small random microgrid: one AC bus, two DC buses on a DC line, one
/// inverter, one or two EVs and at most eight plugged EV-hours. Discharge is
/// sometimes rewarded so that relaxations cycle energy and force branching.
pub fn random_microgrid(seed: u64) -> (NetworkModel, ScenarioConfig) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let horizon = rng.gen_range(2..=4usize);
    let n_ev = rng.gen_range(1..=2usize);
    let mut budget = 8usize;
    let mut evs = Vec::new();
    for e in 0..n_ev {
        let mut plug = vec![0.0; horizon];
        let mut travel = vec![0.0; horizon];
        for t in 0..horizon {
            if budget > 0 && rng.gen_bool(0.8) {
                plug[t] = 1.0;
                budget -= 1;
            } else {
                travel[t] = rng.gen_range(0.0..0.05);
            }
        }
        evs.push(serde_json::json!({
            "id": e + 1, "station_bus": 2 + (e % 2), "count": rng.gen_range(1..=3),
            "e_min": 10.0, "e_max": 90.0, "e_initial": rng.gen_range(30.0..70.0),
            "eta_ch": rng.gen_range(0.85..0.98), "eta_v2g": rng.gen_range(0.85..0.98),
            "plug_profile": plug, "travel_profile": travel,
        }));
    }
    let profile = |rng: &mut ChaCha8Rng, hi: f64| -> Vec<f64> {
        (0..horizon).map(|_| rng.gen_range(0.0..hi)).collect()
    };
    let terminal = ["free", "at_least", "cyclic"][rng.gen_range(0..3)];
    let doc = serde_json::json!({
        "buses": [
            {"id": 1, "side": "AC", "v_min": 0.95, "v_max": 1.05},
            {"id": 2, "side": "DC", "v_min": 0.95, "v_max": 1.05},
            {"id": 3, "side": "DC", "v_min": 0.95, "v_max": 1.05},
        ],
        "lines": [{"id": 1, "from_bus": 2, "to_bus": 3, "side": "DC", "r": 0.05,
                   "s_min": -0.5, "s_max": 0.5}],
        "inverters": [{"id": 1, "ac_bus": 1, "dc_bus": 2,
                       "p_min": -0.2, "p_max": 0.2, "q_min": -0.1, "q_max": 0.1}],
        "renewables": [
            {"id": 1, "kind": "PV", "bus": 3, "forecast": profile(&mut rng, 0.6)},
            {"id": 2, "kind": "WT", "bus": 1, "forecast": profile(&mut rng, 0.2)},
        ],
        "loads": [
            {"id": 1, "bus": 1, "p_demand": profile(&mut rng, 0.2)},
            {"id": 2, "bus": 3, "p_demand": profile(&mut rng, 0.2)},
        ],
        "evs": evs,
        "config": {"horizon": horizon, "k_lost": 1000.0, "beta1": rng.gen_range(-0.6..0.3),
                   "beta2": rng.gen_range(0.0005..0.002), "base_mva": 1000.0,
                   "terminal_energy": terminal},
    });
    parse_model(&doc.to_string()).expect("generated model is valid")
}

/// Best objective over every charge/V2G assignment, each solved as a QP.
/// `None` when no assignment is feasible.
pub fn enumerate_pairs(p: &QpProblem, opts: &SolverOptions) -> Option<f64> {
    let k = p.pairs.len();
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << k) {
        let mut leaf = p.clone();
        for (i, pair) in p.pairs.iter().enumerate() {
            let branch = if mask >> i & 1 == 0 {
                Branch::ChargeOnly
            } else {
                Branch::V2gOnly
            };
            leaf = leaf.fix_pair(pair, branch).expect("pair is registered");
        }
        let s = solve_qp(&leaf, opts).expect("leaf is consistent");
        if s.is_optimal() {
            best = Some(best.map_or(s.objective, |b: f64| b.min(s.objective)));
        }
    }
    best
}
