//! One PASS/FAIL line per acceptance criterion. Exits non-zero on any FAIL.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use gridsched::bnb::{select_branch, solve_miqp, BnbError, BnbOptions};
use gridsched::formulation::{build, VarName};
use gridsched::model::{load_model, parse_model, Ev, Line, NetworkModel, ScenarioConfig, Side};
use gridsched::powerflow::{ac_line_flow, apparent_proxy, dc_line_flow, energy_step};
use gridsched::qpsolver::{solve_qp, QpStatus, SolverOptions};
use gridsched::scenarios::{
    check_trends, run_case, solve_instance, write_case_files, write_solution_files, Case,
    RunOptions,
};
use gridsched_oracle::{random_lp, random_qp, solve_lp, Outcome};

type Verdict = Result<String, String>;

fn reference() -> (NetworkModel, ScenarioConfig) {
    let path = Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/reference.json"));
    load_model(path).expect("shipped dataset loads")
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn text<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn line(side: Side, g: f64, b: f64, r: f64) -> Line {
    Line {
        id: 1,
        from_bus: 1,
        to_bus: 2,
        side,
        g,
        b,
        r,
        s_min: -1.0,
        s_max: 1.0,
    }
}

fn equation_fidelity() -> Verdict {
    let (mut worst, mut count) = (0.0f64, 0);
    let mut close = |got: f64, want: f64| {
        worst = worst.max((got - want).abs());
        count += 1;
    };

    close(apparent_proxy(1.0, 0.0, 0.7), 1.0);
    close(apparent_proxy(0.8, 0.4, 0.5), 1.0);
    close(apparent_proxy(0.8, -0.4, 0.5), 0.6);

    let (p, q) = text(ac_line_flow(&line(Side::Ac, 2.0, 10.0, 0.0), 1.0, 1.0, 0.1, 0.1))?;
    close(p, 0.0);
    close(q, 0.0);
    let (p, q) = text(ac_line_flow(&line(Side::Ac, 0.0, 10.0, 0.0), 1.0, 1.0, 0.01, 0.0))?;
    close(p, 0.1);
    close(q, 0.0);
    let (p, q) = text(ac_line_flow(&line(Side::Ac, 2.0, 10.0, 0.0), 1.02, 1.0, 0.01, 0.0))?;
    close(p, 0.06);
    close(q, 0.22);

    let dc = line(Side::Dc, 0.0, 0.0, 0.02);
    close(text(dc_line_flow(&dc, 1.0, 0.98))?, 1.0);
    close(text(dc_line_flow(&dc, 1.0, 1.0))?, 0.0);
    close(text(dc_line_flow(&dc, 0.98, 1.0))?, -1.0);

    let ev = Ev {
        id: 1,
        station_bus: 1,
        p_max: 150.0,
        e_min: 10.0,
        e_max: 90.0,
        e_initial: 50.0,
        eta_ch: 0.9,
        eta_v2g: 0.9,
        plug_profile: vec![1.0, 0.0],
        travel_profile: vec![0.0, 0.2],
        count: 1,
    };
    close(energy_step(&ev, 50.0, 10.0, 0.0, 0), 59.0);
    close(energy_step(&ev, 50.0, 0.0, 9.0, 0), 40.0);
    close(energy_step(&ev, 50.0, 0.0, 0.0, 1), 20.0);

    // The same recursion as a built constraint row.
    let (m, c) = text(parse_model(
        r#"{"buses": [{"id": 1, "side": "DC", "v_min": 0.95, "v_max": 1.05}], "lines": [],
            "loads": [{"id": 1, "bus": 1, "p_demand": [0.0, 0.0]}],
            "evs": [{"id": 1, "station_bus": 1, "e_min": 10, "e_max": 90, "e_initial": 50,
                     "eta_ch": 0.9, "eta_v2g": 0.9, "plug_profile": [1, 0], "travel_profile": [0, 0.2]}],
            "config": {"horizon": 2, "k_lost": 1000, "beta1": 0.1, "beta2": 0.001, "base_mva": 1000}}"#,
    ))?;
    let f = text(build(&m, &c))?;
    let col = |n, t| f.layout.column(n, 1, t).expect("column exists");
    let (e0, e1, ch1, dis1) = (
        col(VarName::E, 0),
        col(VarName::E, 1),
        col(VarName::PCh, 1),
        col(VarName::PV2g, 1),
    );
    let row = (0..f.qp.a_eq.nrows())
        .find(|&i| f.qp.a_eq.row(i).any(|(j, _)| j == e0) && f.qp.a_eq.row(i).any(|(j, _)| j == e1))
        .ok_or("energy row not found")?;
    let coeff = |j| f.qp.a_eq.row(row).find(|&(k, _)| k == j).map_or(0.0, |x| x.1);
    close(coeff(e1), 1.0);
    close(coeff(e0), -1.0);
    close(coeff(ch1), -0.9);
    close(coeff(dis1), 1.0 / 0.9);
    close(f.qp.b_eq[row], -0.03);

    ensure(worst <= 1e-12, format!("worst deviation {worst:e}"))?;
    Ok(format!("{count} substitutions, worst deviation {worst:e}"))
}

fn miqp_oracle() -> Verdict {
    let opts = BnbOptions {
        gap_tol: 1e-9,
        ..BnbOptions::default()
    };
    let (mut compared, mut branched, mut worst) = (0, 0, 0.0f64);
    for seed in 0..24 {
        let (m, c) = common::random_microgrid(seed);
        let p = build(&m, &c).map_err(|e| e.to_string())?.qp;
        ensure(p.pairs.len() <= 8, format!("seed {seed} has {} pairs", p.pairs.len()))?;
        let expected = common::enumerate_pairs(&p, &SolverOptions::default());
        match (solve_miqp(&p, &opts), expected) {
            (Ok(r), Some(e)) => {
                ensure(
                    select_branch(&r.x, &p.pairs, opts.power_tol).is_none(),
                    format!("seed {seed}: result not complementary"),
                )?;
                let d = common::rel_diff(r.objective, e);
                ensure(d <= 1e-6, format!("seed {seed}: {} vs {e}", r.objective))?;
                worst = worst.max(d);
                compared += 1;
                branched += usize::from(r.nodes > 1);
            }
            (Err(BnbError::Infeasible), None) => compared += 1,
            (r, e) => return Err(format!("seed {seed}: {r:?} vs {e:?}")),
        }
    }
    ensure(compared >= 20, format!("only {compared} instances compared"))?;
    Ok(format!(
        "{compared} instances ({branched} branched), worst relative difference {worst:e}"
    ))
}

fn qp_oracle() -> Verdict {
    let mut worst = 0.0f64;
    let mut count = 0;
    for seed in 0..100u64 {
        for lp in [true, false] {
            let n = 5 + (seed as usize * if lp { 7 } else { 11 }) % 46;
            let inst = if lp {
                random_lp(seed, n)
            } else {
                random_qp(1000 + seed, n)
            };
            let oracle = if lp {
                solve_lp(&inst)
            } else {
                gridsched_oracle::solve_qp(&inst)
            };
            let Outcome::Optimal { objective, .. } = oracle else {
                return Err(format!("oracle failed on seed {seed}"));
            };
            let s = solve_qp(&common::to_qp(&inst), &SolverOptions::default())
                .map_err(|e| e.to_string())?;
            ensure(s.status == QpStatus::Optimal, format!("seed {seed}: {:?}", s.status))?;
            let d = common::rel_diff(s.objective, objective);
            ensure(d <= 1e-6, format!("seed {seed}: {} vs {objective}", s.objective))?;
            worst = worst.max(d);
            count += 1;
        }
    }
    Ok(format!("{count} instances, worst relative difference {worst:e}"))
}

fn end_to_end() -> Verdict {
    let (m, c) = reference();
    let started = Instant::now();
    let s = solve_instance("nominal", &m, &c, &RunOptions::default()).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    let st = &s.solution.stats;
    ensure(st.gap <= 1e-4, format!("gap {}", st.gap))?;
    ensure(
        s.audit.is_empty(),
        format!("{} violations", s.audit.violations.len()),
    )?;
    ensure(elapsed < Duration::from_secs(300), format!("took {elapsed:?}"))?;
    Ok(format!(
        "{:?}, gap {:e}, {} nodes, empty audit at 1e-6, {elapsed:.2?}",
        st.status, st.gap, st.nodes
    ))
}

fn trends(cases: &[Case]) -> Verdict {
    let (m, c) = reference();
    let opts = RunOptions::default();
    let mut names = Vec::new();
    for &case in cases {
        let values = case.table();
        let runs = run_case(&m, &c, case, &values, &opts).map_err(|e| e.to_string())?;
        for check in check_trends(case, &m, &values, &runs, opts.bnb.gap_tol) {
            ensure(check.holds, format!("{}: {}", check.name, check.detail))?;
            names.push(check.name);
        }
    }
    Ok(names.join(", "))
}

fn determinism() -> Verdict {
    let (m, c) = reference();
    let run = |dir: &Path| -> Result<(), String> {
        let opts = RunOptions::default();
        let s = solve_instance("nominal", &m, &c, &opts).map_err(|e| e.to_string())?;
        write_solution_files(dir, &s).map_err(|e| e.to_string())?;
        let values = Case::Degradation.table();
        let runs = run_case(&m, &c, Case::Degradation, &values, &opts).map_err(|e| e.to_string())?;
        let checks = check_trends(Case::Degradation, &m, &values, &runs, opts.bnb.gap_tol);
        write_case_files(dir, Case::Degradation, &values, &runs, &checks).map_err(|e| e.to_string())
    };
    let (a, b) = (tempfile::tempdir().map_err(|e| e.to_string())?, tempfile::tempdir().map_err(|e| e.to_string())?);
    run(a.path())?;
    run(b.path())?;
    let files = ["solution.json", "audit.csv", "metrics.csv", "case2.csv", "case2_summary.json"];
    for f in files {
        let x = std::fs::read(a.path().join(f)).map_err(|e| e.to_string())?;
        let y = std::fs::read(b.path().join(f)).map_err(|e| e.to_string())?;
        ensure(x == y, format!("{f} differs"))?;
    }
    Ok(format!("{} artifacts byte-identical", files.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("1 equation fidelity", equation_fidelity),
        ("2 MIQP matches enumeration", miqp_oracle),
        ("3 QP matches simplex/active-set oracle", qp_oracle),
        ("4 reference solve feasible and tight", end_to_end),
        ("5 case 1 nominal day", || trends(&[Case::Nominal])),
        ("6 case 2 degradation trends", || trends(&[Case::Degradation])),
        ("7 case 3/4 irradiance and inverter trends", || {
            trends(&[Case::Irradiance, Case::InverterCapacity])
        }),
        ("8 single-worker determinism", determinism),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f))
            .unwrap_or_else(|p| Err(format!("panicked: {:?}", p.downcast_ref::<String>())));
        let t = started.elapsed();
        match outcome {
            Ok(detail) => println!("PASS {name} ({t:.2?}): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name} ({t:.2?}): {detail}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
