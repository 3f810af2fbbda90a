use super::*;
use crate::model::parse_model;

fn one_hour(p_demand: f64) -> (NetworkModel, ScenarioConfig) {
    let json = format!(
        r#"{{
  "buses": [{{"id": 1, "side": "DC", "v_min": 0.95, "v_max": 1.05}}],
  "lines": [],
  "renewables": [{{"id": 1, "kind": "PV", "bus": 1, "forecast": [3.0]}},
                 {{"id": 2, "kind": "WT", "bus": 1, "forecast": [1.0]}}],
  "loads": [{{"id": 1, "bus": 1, "p_demand": [{p_demand}]}}],
  "evs": [{{"id": 1, "station_bus": 1, "e_min": 10, "e_max": 90, "e_initial": 50, "count": 4,
            "eta_ch": 0.9, "eta_v2g": 0.9, "plug_profile": [1], "travel_profile": [0]}}],
  "config": {{"horizon": 1, "k_lost": 1000, "beta1": 0.1, "beta2": 0.001, "base_mva": 1000,
             "terminal_energy": "free"}}
}}"#
    );
    parse_model(&json).unwrap()
}

#[test]
fn full_service_has_no_lost_load() {
    let (m, c) = one_hour(2.0);
    let mut pt = OperatingPoint::zeros(&m, c.base_mva);
    pt.p_served[0][0] = 2.0;
    let row = compute_metrics("x", &m, &c, &pt);
    assert_eq!(row.lost_load_pct, 0.0);
    assert_eq!(row.objective, 0.0);
}

#[test]
fn quarter_of_demand_lost() {
    let (m, c) = one_hour(2.0);
    let mut pt = OperatingPoint::zeros(&m, c.base_mva);
    pt.p_served[0][0] = 1.5;
    let row = compute_metrics("x", &m, &c, &pt);
    assert!((row.lost_load_pct - 25.0).abs() <= 1e-12);
    // 0.5 p.u.·h on a 1000 kW base at 1 $/kWh.
    assert!((row.objective - 500.0).abs() <= 1e-9);
}

#[test]
fn no_discharge_means_no_degradation() {
    let (m, c) = one_hour(2.0);
    let mut pt = OperatingPoint::zeros(&m, c.base_mva);
    pt.p_ch[0][0] = 100.0;
    let row = compute_metrics("x", &m, &c, &pt);
    assert_eq!(row.degradation_cost, 0.0);
    assert_eq!(row.charged_energy, 100.0);
}

#[test]
fn degradation_is_per_vehicle() {
    let (m, c) = one_hour(2.0);
    let mut pt = OperatingPoint::zeros(&m, c.base_mva);
    pt.p_v2g[0][0] = 40.0;
    let row = compute_metrics("x", &m, &c, &pt);
    // Four vehicles at 10 kW each: 4·(0.001·100 + 0.1·10).
    assert!((row.degradation_cost - 4.4).abs() <= 1e-12);
    assert_eq!(row.v2g_energy, 40.0);
}

#[test]
fn zero_demand_reports_zero() {
    let (m, c) = one_hour(0.0);
    let pt = OperatingPoint::zeros(&m, c.base_mva);
    assert_eq!(compute_metrics("x", &m, &c, &pt).lost_load_pct, 0.0);
}

#[test]
fn utilization_splits_by_kind() {
    let (m, c) = one_hour(2.0);
    let mut pt = OperatingPoint::zeros(&m, c.base_mva);
    pt.p_ren[0][0] = 1.25;
    pt.p_ren[1][0] = 0.5;
    let row = compute_metrics("x", &m, &c, &pt);
    assert_eq!(row.pv_utilized, 1250.0);
    assert_eq!(row.wt_utilized, 500.0);
}

#[test]
fn case_tables() {
    assert_eq!(
        Case::Degradation.table(),
        vec![0.1, 0.5, 1.0, 1.25, 1.5, 2.0, 2.5, 5.0, 7.5, 10.0]
    );
    assert_eq!(Case::Irradiance.table().len(), 10);
    assert_eq!(Case::Irradiance.table()[9], 1.0);
    assert_eq!(Case::InverterCapacity.table()[0], 0.0);
    assert_eq!(Case::InverterCapacity.table().len(), 10);
    for n in 1..=4 {
        assert_eq!(Case::from_number(n).unwrap().number(), n);
    }
    assert_eq!(Case::from_number(5), None);
}

#[test]
fn configure_sets_only_the_swept_field() {
    let base = ScenarioConfig::default();
    let c = Case::InverterCapacity.configure(&base, 0.3);
    assert_eq!(c.inverter_capacity_fraction, 0.3);
    assert_eq!(c.irradiance_fraction, 1.0);
    assert_eq!(Case::Irradiance.label(0.3), "irradiance=30%");
    assert_eq!(Case::Degradation.label(1.25), "deg=1.25");
}

#[test]
fn monotone_detects_a_rise() {
    let c = monotone("t", &[1.0, 2.0, 3.0], &[3.0, 2.0, 2.5], false, |_| 1e-9);
    assert!(!c.holds);
    assert!(c.detail.contains("2.5"));
    assert!(monotone("t", &[1.0, 2.0], &[3.0, 3.0], false, |_| 0.0).holds);
}

#[test]
fn metrics_csv_has_header() {
    let (m, c) = one_hour(2.0);
    let pt = OperatingPoint::zeros(&m, c.base_mva);
    let row = compute_metrics("a,b", &m, &c, &pt);
    let mut buf = Vec::new();
    write_metrics_csv(&[row], &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "label,objective,lost_load_pct,charged_energy,v2g_energy,degradation_cost,pv_utilized,wt_utilized"
    );
    assert!(lines.next().unwrap().starts_with("\"a,b\",2000.0,100.0,"));
}

#[test]
fn solve_audit_and_report_agree() {
    let (m, c) = one_hour(2.0);
    let solved = solve_instance("one", &m, &c, &RunOptions::default()).unwrap();
    assert!(solved.audit.is_empty());
    assert!(solved.metrics.lost_load_pct <= 1e-6);
    let text = solved.solution.to_json().unwrap();
    let back = StoredSolution::from_json(&text).unwrap();
    let (audit, metrics) = back.evaluate(1e-6).unwrap();
    assert!(audit.is_empty());
    assert_eq!(metrics, solved.metrics);
}
