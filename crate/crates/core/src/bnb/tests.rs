use super::*;
use crate::formulation::build;
use crate::model::parse_model;

fn pair(ev: u32, hour: usize, col_ch: usize, col_v2g: usize) -> ExclusivityPair {
    ExclusivityPair {
        ev,
        hour,
        col_ch,
        col_v2g,
    }
}

#[test]
fn complementary_point_selects_nothing() {
    let x = [0.3, 0.0, 0.0, 0.7];
    let pairs = [pair(1, 0, 0, 1), pair(1, 1, 2, 3)];
    assert_eq!(select_branch(&x, &pairs, 1e-6), None);
}

#[test]
fn largest_violation_wins() {
    let x = [0.2, 0.4, 0.9, 0.5];
    let pairs = [pair(1, 0, 0, 1), pair(2, 0, 2, 3)];
    assert_eq!(select_branch(&x, &pairs, 1e-6), Some(pairs[1]));
}

#[test]
fn ties_go_to_the_earliest_hour() {
    let x = [0.5, 0.5, 0.5, 0.5];
    let pairs = [pair(1, 7, 2, 3), pair(1, 3, 0, 1)];
    assert_eq!(select_branch(&x, &pairs, 1e-6), Some(pairs[1]));
}

fn single_ev(beta1: f64, shedding: bool, demand: f64) -> QpProblem {
    let json = format!(
        r#"{{
  "buses": [{{"id": 1, "side": "DC", "v_min": 0.95, "v_max": 1.05}}],
  "lines": [],
  "renewables": [{{"id": 1, "kind": "PV", "bus": 1, "forecast": [0.3, 0.0, 0.0]}}],
  "loads": [{{"id": 1, "bus": 1, "p_demand": [0.05, 0.1, {demand}]}}],
  "evs": [{{"id": 1, "station_bus": 1, "e_min": 10, "e_max": 90, "e_initial": 50,
            "eta_ch": 0.9, "eta_v2g": 0.9, "plug_profile": [1, 1, 1], "travel_profile": [0, 0, 0]}}],
  "config": {{"horizon": 3, "k_lost": 1000, "beta1": {beta1}, "beta2": 0.001, "base_mva": 1000,
             "allow_load_shedding": {shedding}}}
}}"#
    );
    let (m, c) = parse_model(&json).unwrap();
    build(&m, &c).unwrap().qp
}

#[test]
fn complementary_relaxation_needs_one_node() {
    let r = solve_miqp(&single_ev(0.1, true, 0.05), &BnbOptions::default()).unwrap();
    assert_eq!(r.nodes, 1);
    assert_eq!(r.status, BnbStatus::Proven);
    assert_eq!(r.gap, 0.0);
}

#[test]
fn paid_discharge_forces_branching() {
    // Negative beta1 rewards V2G, so the relaxation cycles energy.
    let p = single_ev(-0.5, true, 0.05);
    let relaxed = solve_qp(&p, &SolverOptions::default()).unwrap();
    assert!(select_branch(&relaxed.x, &p.pairs, 1e-6).is_some());
    let r = solve_miqp(&p, &BnbOptions::default()).unwrap();
    assert!(r.nodes > 1);
    assert!(select_branch(&r.x, &p.pairs, 1e-6).is_none());
    assert!(r.objective >= relaxed.objective - 1e-6);
    assert!(r.gap <= 1e-4);
}

#[test]
fn forced_demand_beyond_capability_is_infeasible() {
    // 200 kW for an hour exceeds the 150 kW plug limit with no PV at night.
    let p = single_ev(0.1, false, 0.2);
    assert_eq!(solve_miqp(&p, &BnbOptions::default()), Err(BnbError::Infeasible));
}

#[test]
fn log_csv_has_header() {
    let r = solve_miqp(&single_ev(-0.5, true, 0.05), &BnbOptions::default()).unwrap();
    let mut buf = Vec::new();
    r.write_log_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("node,depth,bound,incumbent,gap\n"));
    assert_eq!(text.lines().count(), r.log.len() + 1);
}

#[test]
fn batched_search_reaches_the_same_objective() {
    let p = single_ev(-0.5, true, 0.05);
    let seq = solve_miqp(&p, &BnbOptions::default()).unwrap();
    let par = solve_miqp(
        &p,
        &BnbOptions {
            workers: 4,
            ..BnbOptions::default()
        },
    )
    .unwrap();
    assert!((seq.objective - par.objective).abs() <= 1e-4 * seq.objective.abs().max(1.0));
}

#[test]
fn dual_indicator_marks_degenerate_zeros() {
    let mut p = QpProblem::new(2);
    p.lower = vec![0.0, 0.0];
    p.upper = vec![1.0, 1.0];
    // Column 0 hovers above its bound with a larger multiplier; column 1 is interior.
    let x = [2e-5, 0.4];
    let z = [4e-3, 1e-7];
    assert_eq!(active_bounds(&p, &x, &z, true), vec![(0, 0.0)]);
    assert!(active_bounds(&p, &x, &z, false).is_empty());
}
