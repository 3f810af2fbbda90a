//! Case studies as sweeps over one multiplier, the reported metrics, and the
//! files written for each run.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bnb::{solve_miqp, BnbError, BnbOptions, BnbResult, BnbStatus, NodeRecord};
use crate::formulation::{build, FormulationError, ObjectiveTerms};
use crate::model::{
    ModelDocument, ModelError, NetworkModel, RenewableKind, ScenarioConfig,
};
use crate::par::Pool;
use crate::powerflow::{check_feasibility, FeasibilityReport, OperatingPoint, PowerflowError};

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Formulation(#[from] FormulationError),
    #[error("{label}: {source}")]
    Search {
        label: String,
        #[source]
        source: BnbError,
    },
    #[error(transparent)]
    Powerflow(#[from] PowerflowError),
    #[error("{label}: {count} audit violations, worst {worst}")]
    Audit {
        label: String,
        count: usize,
        worst: String,
    },
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

/// The four case studies. Case 1 is the nominal day; the others sweep one
/// multiplier over the grid in [`Case::table`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Case {
    Nominal,
    Degradation,
    Irradiance,
    InverterCapacity,
}

impl Case {
    pub fn from_number(n: u8) -> Option<Case> {
        match n {
            1 => Some(Case::Nominal),
            2 => Some(Case::Degradation),
            3 => Some(Case::Irradiance),
            4 => Some(Case::InverterCapacity),
            _ => None,
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Case::Nominal => 1,
            Case::Degradation => 2,
            Case::Irradiance => 3,
            Case::InverterCapacity => 4,
        }
    }

    /// Name of the swept config field.
    pub fn parameter(self) -> &'static str {
        match self {
            Case::Nominal => "none",
            Case::Degradation => "deg_multiplier",
            Case::Irradiance => "irradiance_fraction",
            Case::InverterCapacity => "inverter_capacity_fraction",
        }
    }

    /// Default multiplier grid, in instance order.
    pub fn table(self) -> Vec<f64> {
        match self {
            Case::Nominal => vec![1.0],
            Case::Degradation => vec![0.1, 0.5, 1.0, 1.25, 1.5, 2.0, 2.5, 5.0, 7.5, 10.0],
            Case::Irradiance => (1..=10).map(|k| k as f64 / 10.0).collect(),
            Case::InverterCapacity => vec![0.0, 0.15, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0],
        }
    }

    /// `base` with the swept multiplier set to `value`.
    pub fn configure(self, base: &ScenarioConfig, value: f64) -> ScenarioConfig {
        let mut c = base.clone();
        match self {
            Case::Nominal => {}
            Case::Degradation => c.deg_multiplier = value,
            Case::Irradiance => c.irradiance_fraction = value,
            Case::InverterCapacity => c.inverter_capacity_fraction = value,
        }
        c
    }

    pub fn label(self, value: f64) -> String {
        match self {
            Case::Nominal => "nominal".to_string(),
            Case::Degradation => format!("deg={value}"),
            Case::Irradiance => format!("irradiance={}%", pct(value)),
            Case::InverterCapacity => format!("inverter={}%", pct(value)),
        }
    }
}

fn pct(fraction: f64) -> f64 {
    (fraction * 1e4).round() / 100.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub label: String,
    /// Dollars.
    pub objective: f64,
    /// Percent of total requested demand.
    pub lost_load_pct: f64,
    /// kWh drawn from the grid by all EVs.
    pub charged_energy: f64,
    /// kWh injected by all EVs.
    pub v2g_energy: f64,
    /// Dollars.
    pub degradation_cost: f64,
    /// kWh.
    pub pv_utilized: f64,
    /// kWh.
    pub wt_utilized: f64,
}

/// Reported quantities for `point`, which must belong to the scenario-applied
/// `model` and `config`.
pub fn compute_metrics(
    label: &str,
    model: &NetworkModel,
    config: &ScenarioConfig,
    point: &OperatingPoint,
) -> MetricsRow {
    let base = point.base_kw;
    let horizon = model.horizon();
    let demand = model.total_demand();
    let served: f64 = point.p_served.iter().flatten().sum();
    let unserved = demand - served;
    let lost_load_pct = if demand > 0.0 {
        (100.0 * unserved / demand).max(0.0)
    } else {
        0.0
    };
    let lost_cost = config.k_lost / 1000.0 * unserved * base;

    let mut degradation_cost = 0.0;
    for (e, ev) in model.evs().iter().enumerate() {
        let n = ev.count as f64;
        for t in 0..horizon {
            let p = point.p_v2g[e][t];
            degradation_cost += config.beta1 * p + config.beta2 * p * p / n;
        }
    }

    let mut pv_utilized = 0.0;
    let mut wt_utilized = 0.0;
    for (k, unit) in model.renewables().iter().enumerate() {
        let kwh: f64 = point.p_ren[k].iter().sum::<f64>() * base;
        match unit.kind {
            RenewableKind::Pv => pv_utilized += kwh,
            RenewableKind::Wt => wt_utilized += kwh,
        }
    }

    MetricsRow {
        label: label.to_string(),
        objective: lost_cost + degradation_cost,
        lost_load_pct,
        charged_energy: point.p_ch.iter().flatten().sum(),
        v2g_energy: point.p_v2g.iter().flatten().sum(),
        degradation_cost,
        pv_utilized,
        wt_utilized,
    }
}

/// Fleet charging and V2G power per hour, kW.
pub fn hourly_ev_power(point: &OperatingPoint) -> (Vec<f64>, Vec<f64>) {
    let horizon = point.v.first().map_or(0, Vec::len);
    let sum = |rows: &[Vec<f64>], t: usize| rows.iter().map(|r| r[t]).sum::<f64>();
    (
        (0..horizon).map(|t| sum(&point.p_ch, t)).collect(),
        (0..horizon).map(|t| sum(&point.p_v2g, t)).collect(),
    )
}

/// Energy moved from the AC side to the DC side through all inverters, kWh.
pub fn ac_to_dc_energy(point: &OperatingPoint) -> f64 {
    point
        .p_inv
        .iter()
        .flatten()
        .map(|p| (-p).max(0.0))
        .sum::<f64>()
        * point.base_kw
}

/// Charged energy (kWh) needed to cover the trips alone.
pub fn trip_charge_energy(model: &NetworkModel) -> f64 {
    model.evs().iter().map(|e| e.trip_charge_energy()).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub status: BnbStatus,
    pub objective: f64,
    pub bound: f64,
    pub gap: f64,
    pub nodes: usize,
    pub qp_iterations: usize,
    pub polished: bool,
}

impl From<&BnbResult> for SolverStats {
    fn from(r: &BnbResult) -> Self {
        SolverStats {
            status: r.status,
            objective: r.objective,
            bound: r.bound,
            gap: r.gap,
            nodes: r.nodes,
            qp_iterations: r.qp_iterations,
            polished: r.polished,
        }
    }
}

/// Everything `report` needs: the scenario-applied input, the trajectories
/// and the solver statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredSolution {
    pub label: String,
    pub input: ModelDocument,
    pub point: OperatingPoint,
    pub terms: ObjectiveTerms,
    pub stats: SolverStats,
}

impl StoredSolution {
    pub fn to_json(&self) -> Result<String, serde_json::Error> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Rebuilds the applied model, audits the stored point and recomputes
    /// the metrics.
    pub fn evaluate(&self, audit_tol: f64) -> Result<(FeasibilityReport, MetricsRow), ScenarioError> {
        let (model, config) = NetworkModel::from_document(self.input.clone())?;
        let audit = check_feasibility(&model, &config, &self.point, audit_tol)?;
        let metrics = compute_metrics(&self.label, &model, &config, &self.point);
        Ok((audit, metrics))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub bnb: BnbOptions,
    pub audit_tol: f64,
    /// Parallel sweep instances; 0 means one per core.
    pub workers: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            bnb: BnbOptions::default(),
            audit_tol: 1e-6,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Solved {
    pub solution: StoredSolution,
    pub audit: FeasibilityReport,
    pub metrics: MetricsRow,
    pub log: Vec<NodeRecord>,
}

/// Applies the scenario, solves the MIQP, audits the result and computes the
/// metrics.
pub fn solve_instance(
    label: &str,
    model: &NetworkModel,
    config: &ScenarioConfig,
    opts: &RunOptions,
) -> Result<Solved, ScenarioError> {
    let started = Instant::now();
    let formulation = build(model, config)?;
    let result = solve_miqp(&formulation.qp, &opts.bnb).map_err(|source| ScenarioError::Search {
        label: label.to_string(),
        source,
    })?;
    let point = formulation.extract(&result.x)?;
    let (model, config) = (&formulation.model, &formulation.config);
    let audit = check_feasibility(model, config, &point, opts.audit_tol)?;
    let metrics = compute_metrics(label, model, config, &point);
    log::info!(
        "{label}: {:?} objective {:.6} gap {:.2e} nodes {} in {:.2?}",
        result.status,
        result.objective,
        result.gap,
        result.nodes,
        started.elapsed()
    );
    let solution = StoredSolution {
        label: label.to_string(),
        input: model.to_document(config),
        terms: formulation.objective_terms(&result.x),
        stats: SolverStats::from(&result),
        point,
    };
    Ok(Solved {
        solution,
        audit,
        metrics,
        log: result.log,
    })
}

/// One solve per sweep value, all from the same base data. Results are in
/// sweep order; any instance with a non-empty audit aborts the sweep.
pub fn run_case(
    model: &NetworkModel,
    config: &ScenarioConfig,
    case: Case,
    sweep: &[f64],
    opts: &RunOptions,
) -> Result<Vec<Solved>, ScenarioError> {
    let pool = Pool::new(opts.workers);
    let mut inner = opts.clone();
    if pool.workers() > 1 && sweep.len() > 1 {
        // Instances already fill the pool.
        inner.bnb.workers = 1;
    }
    let results = pool.map(sweep, |&value| {
        let cfg = case.configure(config, value);
        solve_instance(&case.label(value), model, &cfg, &inner)
    });
    let mut out = Vec::with_capacity(results.len());
    for r in results {
        let solved = r?;
        if !solved.audit.is_empty() {
            return Err(audit_error(&solved));
        }
        out.push(solved);
    }
    Ok(out)
}

pub(crate) fn audit_error(s: &Solved) -> ScenarioError {
    let worst = s
        .audit
        .violations
        .iter()
        .max_by(|a, b| a.violation.total_cmp(&b.violation))
        .map(|v| format!("{} element {} hour {} by {:e}", v.constraint, v.element_id, v.hour, v.violation))
        .unwrap_or_default();
    ScenarioError::Audit {
        label: s.solution.label.clone(),
        count: s.audit.violations.len(),
        worst,
    }
}

/// Outcome of one trend or boundary property over a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendCheck {
    pub name: String,
    pub holds: bool,
    pub detail: String,
}

fn check(name: &str, holds: bool, detail: String) -> TrendCheck {
    TrendCheck {
        name: name.to_string(),
        holds,
        detail,
    }
}

/// Slack allowed when comparing objectives reported within `gap_tol`.
fn objective_slack(gap_tol: f64, v: f64) -> f64 {
    gap_tol * v.abs().max(1.0) + 1e-6
}

const ENERGY_TOL: f64 = 1e-6;
const PCT_TOL: f64 = 1e-6;

fn monotone(
    name: &str,
    values: &[f64],
    series: &[f64],
    increasing: bool,
    slack: impl Fn(f64) -> f64,
) -> TrendCheck {
    for k in 1..series.len() {
        let (a, b) = (series[k - 1], series[k]);
        let bad = if increasing {
            b < a - slack(a)
        } else {
            b > a + slack(a)
        };
        if bad {
            return check(
                name,
                false,
                format!("{a} at {} then {b} at {}", values[k - 1], values[k]),
            );
        }
    }
    check(name, true, format!("{} instances", series.len()))
}

/// The properties expected of each case on the shipped dataset.
///
/// `model` is the unscaled base model, `values` the sweep and `runs` the
/// matching results.
pub fn check_trends(
    case: Case,
    model: &NetworkModel,
    values: &[f64],
    runs: &[Solved],
    gap_tol: f64,
) -> Vec<TrendCheck> {
    let rows: Vec<&MetricsRow> = runs.iter().map(|r| &r.metrics).collect();
    let col = |f: fn(&MetricsRow) -> f64| rows.iter().map(|r| f(r)).collect::<Vec<f64>>();
    let rel = |v: f64| ENERGY_TOL * v.abs().max(1.0);
    match case {
        Case::Nominal => {
            let mut out = Vec::new();
            let Some(run) = runs.first() else {
                return vec![check("nominal_run", false, "no run".into())];
            };
            let m = &run.metrics;
            out.push(check(
                "no_lost_load",
                m.lost_load_pct <= PCT_TOL,
                format!("lost load {:e}%", m.lost_load_pct),
            ));
            let renewables = model.renewable_forecast_by_hour();
            let demand = model.demand_by_hour();
            let (charge, v2g) = hourly_ev_power(&run.solution.point);
            let mut deficit_bad = Vec::new();
            let mut surplus_bad = Vec::new();
            for t in 0..demand.len() {
                let net = v2g[t] - charge[t];
                if renewables[t] < demand[t] - 1e-9 && !(net > 0.0) {
                    deficit_bad.push(t);
                }
                if renewables[t] > demand[t] + 1e-9 && !(net < 0.0) {
                    surplus_bad.push(t);
                }
            }
            out.push(check(
                "v2g_in_deficit_hours",
                deficit_bad.is_empty(),
                format!("hours without net discharge: {deficit_bad:?}"),
            ));
            out.push(check(
                "charging_in_surplus_hours",
                surplus_bad.is_empty(),
                format!("hours without net charging: {surplus_bad:?}"),
            ));
            out
        }
        Case::Degradation => {
            let objective = col(|r| r.objective);
            let charged = col(|r| r.charged_energy);
            let trip = trip_charge_energy(model);
            let mut out = vec![
                monotone("objective_non_decreasing", values, &objective, true, |v| {
                    objective_slack(gap_tol, v)
                }),
                monotone("charged_energy_non_increasing", values, &charged, false, rel),
            ];
            let at_trip = (0..rows.len())
                .filter(|&k| (charged[k] - trip).abs() <= rel(trip))
                .max_by(|&a, &b| values[a].total_cmp(&values[b]));
            out.push(match at_trip {
                Some(k) => check(
                    "zero_degradation_at_trip_energy",
                    rows[k].degradation_cost == 0.0,
                    format!(
                        "multiplier {} charged {} kWh, degradation {} $",
                        values[k], charged[k], rows[k].degradation_cost
                    ),
                ),
                None => check(
                    "zero_degradation_at_trip_energy",
                    false,
                    format!("no instance charges exactly the trip energy {trip} kWh"),
                ),
            });
            out
        }
        Case::Irradiance => vec![monotone(
            "lost_load_non_increasing_in_irradiance",
            values,
            &col(|r| r.lost_load_pct),
            false,
            |_| PCT_TOL,
        )],
        Case::InverterCapacity => {
            let mut out = vec![monotone(
                "lost_load_non_increasing_in_inverter_capacity",
                values,
                &col(|r| r.lost_load_pct),
                false,
                |_| PCT_TOL,
            )];
            if let Some(k) = (0..values.len()).find(|&k| values[k] == 0.0) {
                let transfer = ac_to_dc_energy(&runs[k].solution.point);
                out.push(check(
                    "no_ac_to_dc_at_zero_capacity",
                    transfer == 0.0,
                    format!("AC to DC transfer {transfer} kWh"),
                ));
            }
            let wt = col(|r| r.wt_utilized);
            let spread = wt.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                - wt.iter().cloned().fold(f64::INFINITY, f64::min);
            out.push(check(
                "wind_utilization_invariant",
                spread <= rel(wt.first().copied().unwrap_or(0.0)),
                format!("spread {spread} kWh"),
            ));
            out
        }
    }
}

/// Writes rows with a header line.
pub fn write_metrics_csv<W: Write>(rows: &[MetricsRow], out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record([
        "label",
        "objective",
        "lost_load_pct",
        "charged_energy",
        "v2g_energy",
        "degradation_cost",
        "pv_utilized",
        "wt_utilized",
    ])?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// `solution.json`, `audit.csv` and `metrics.csv` for one solve.
pub fn write_solution_files(dir: &Path, solved: &Solved) -> Result<(), ScenarioError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("solution.json"), solved.solution.to_json()? + "\n")?;
    write_report_files(dir, &solved.audit, &solved.metrics)
}

/// `audit.csv` and `metrics.csv`.
pub fn write_report_files(
    dir: &Path,
    audit: &FeasibilityReport,
    metrics: &MetricsRow,
) -> Result<(), ScenarioError> {
    fs::create_dir_all(dir)?;
    audit.write_csv(fs::File::create(dir.join("audit.csv"))?)?;
    write_metrics_csv(std::slice::from_ref(metrics), fs::File::create(dir.join("metrics.csv"))?)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct InstanceSummary {
    label: String,
    value: f64,
    stats: SolverStats,
    audit_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CaseSummary {
    case: u8,
    parameter: String,
    instances: Vec<InstanceSummary>,
    checks: Vec<TrendCheck>,
}

/// `caseN.csv` with one metrics row per instance and `caseN_summary.json`
/// with solver statistics and the trend checks.
pub fn write_case_files(
    dir: &Path,
    case: Case,
    values: &[f64],
    runs: &[Solved],
    checks: &[TrendCheck],
) -> Result<(), ScenarioError> {
    fs::create_dir_all(dir)?;
    let n = case.number();
    let rows: Vec<MetricsRow> = runs.iter().map(|r| r.metrics.clone()).collect();
    write_metrics_csv(&rows, fs::File::create(dir.join(format!("case{n}.csv")))?)?;
    let summary = CaseSummary {
        case: n,
        parameter: case.parameter().to_string(),
        instances: runs
            .iter()
            .zip(values)
            .map(|(r, &value)| InstanceSummary {
                label: r.solution.label.clone(),
                value,
                stats: r.solution.stats.clone(),
                audit_violations: r.audit.violations.len(),
            })
            .collect(),
        checks: checks.to_vec(),
    };
    fs::write(
        dir.join(format!("case{n}_summary.json")),
        serde_json::to_string_pretty(&summary)? + "\n",
    )?;
    Ok(())
}

#[cfg(test)]
mod tests;
