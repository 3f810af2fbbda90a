use std::path::Path;
use std::time::{Duration, Instant};

use gridsched::model::{load_model, reference};
use gridsched::powerflow::nodal_residuals;
use gridsched::scenarios::{
    check_trends, run_case, solve_instance, write_metrics_csv, Case, RunOptions, Solved,
};

fn shipped() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/reference.json"))
}

fn nominal() -> Solved {
    let (m, c) = load_model(shipped()).unwrap();
    solve_instance("nominal", &m, &c, &RunOptions::default()).unwrap()
}

fn assert_trends(case: Case, opts: &RunOptions) {
    let (m, c) = load_model(shipped()).unwrap();
    let values = case.table();
    let runs = run_case(&m, &c, case, &values, opts).unwrap();
    assert_eq!(runs.len(), values.len());
    for r in &runs {
        assert!(r.solution.stats.gap <= 1e-4, "{}", r.solution.label);
    }
    for check in check_trends(case, &m, &values, &runs, opts.bnb.gap_tol) {
        assert!(check.holds, "{}: {}", check.name, check.detail);
    }
}

#[test]
fn shipped_dataset_matches_generator() {
    let text = std::fs::read_to_string(shipped()).unwrap();
    let (m, c) = reference::model().unwrap();
    assert_eq!(text, gridsched::model::to_json(&m, &c));
}

#[test]
fn reference_solve_is_feasible_and_tight() {
    let started = Instant::now();
    let s = nominal();
    assert!(started.elapsed() < Duration::from_secs(300));
    assert!(s.solution.stats.gap <= 1e-4);
    assert!(s.audit.is_empty(), "{:?}", s.audit.violations.first());
    assert_eq!(s.audit.tol, 1e-6);
}

#[test]
fn served_energy_balances_supply() {
    let s = nominal();
    let (m, _) = load_model(shipped()).unwrap();
    let res = nodal_residuals(&m, &s.solution.point).unwrap();
    assert!(res.max_abs() <= 1e-6);
    let pt = &s.solution.point;
    for t in 0..m.horizon() {
        let net: f64 = res.dp.iter().map(|r| r[t]).sum();
        let supply: f64 = pt.p_ren.iter().map(|r| r[t]).sum::<f64>()
            + pt.p_v2g.iter().map(|r| r[t]).sum::<f64>() / pt.base_kw;
        let use_: f64 = pt.p_served.iter().map(|r| r[t]).sum::<f64>()
            + pt.p_ch.iter().map(|r| r[t]).sum::<f64>() / pt.base_kw;
        assert!((supply - use_ - net).abs() <= 1e-9, "hour {t}");
    }
}

#[test]
fn nominal_day_serves_everything() {
    assert_trends(Case::Nominal, &RunOptions::default());
}

#[test]
fn degradation_sweep_trends() {
    assert_trends(Case::Degradation, &RunOptions::default());
}

#[test]
fn irradiance_sweep_trends() {
    assert_trends(Case::Irradiance, &RunOptions::default());
}

#[test]
fn inverter_sweep_trends() {
    assert_trends(Case::InverterCapacity, &RunOptions::default());
}

#[test]
fn single_worker_runs_are_byte_identical() {
    let a = nominal();
    let b = nominal();
    assert_eq!(a.solution.to_json().unwrap(), b.solution.to_json().unwrap());
    let csv = |s: &Solved| {
        let mut buf = Vec::new();
        write_metrics_csv(std::slice::from_ref(&s.metrics), &mut buf).unwrap();
        s.audit.write_csv(&mut buf).unwrap();
        buf
    };
    assert_eq!(csv(&a), csv(&b));
}

#[test]
fn parallel_sweep_matches_sequential() {
    let (m, c) = load_model(shipped()).unwrap();
    let values = Case::Irradiance.table();
    let seq = run_case(&m, &c, Case::Irradiance, &values, &RunOptions::default()).unwrap();
    let par = run_case(
        &m,
        &c,
        Case::Irradiance,
        &values,
        &RunOptions {
            workers: 4,
            ..RunOptions::default()
        },
    )
    .unwrap();
    for (s, p) in seq.iter().zip(&par) {
        assert_eq!(s.metrics, p.metrics);
    }
}
