//! Constraint-by-constraint audit of an operating point.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{ac_line_flow, dc_line_flow, energy_step, nodal_residuals, OperatingPoint, PowerflowError};
use crate::model::{NetworkModel, ScenarioConfig, Side, TerminalEnergy};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: String,
    pub element_id: u32,
    pub hour: usize,
    /// Amount by which the constraint is exceeded, p.u. (p.u.·h for energy).
    pub violation: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub tol: f64,
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn max_violation(&self) -> f64 {
        self.violations
            .iter()
            .fold(0.0f64, |m, v| m.max(v.violation))
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        w.write_record(["constraint", "element_id", "hour", "violation"])?;
        for v in &self.violations {
            w.serialize(v)?;
        }
        w.flush()?;
        Ok(())
    }
}

struct Collector {
    tol: f64,
    out: Vec<Violation>,
}

impl Collector {
    fn push(&mut self, constraint: &str, element_id: u32, hour: usize, amount: f64) {
        if amount > self.tol || amount.is_nan() {
            self.out.push(Violation {
                constraint: constraint.to_string(),
                element_id,
                hour,
                violation: amount,
            });
        }
    }

    /// Violation of `lo <= x <= hi`.
    fn range(&mut self, constraint: &str, id: u32, hour: usize, x: f64, lo: f64, hi: f64) {
        self.push(constraint, id, hour, (lo - x).max(x - hi).max(0.0));
    }
}

/// Every constraint of the scheduling model violated by more than `tol`.
///
/// `model` and `config` must be the scenario-applied pair the point was
/// computed for.
pub fn check_feasibility(
    model: &NetworkModel,
    config: &ScenarioConfig,
    point: &OperatingPoint,
    tol: f64,
) -> Result<FeasibilityReport, PowerflowError> {
    point.check_dimensions(model)?;
    let horizon = model.horizon();
    let base = point.base_kw;
    let mut c = Collector {
        tol,
        out: Vec::new(),
    };
    let bus_of = |id: u32| model.bus_position(id).expect("validated model");

    for (i, bus) in model.buses().iter().enumerate() {
        for t in 0..horizon {
            c.range("voltage", bus.id, t, point.v[i][t], bus.v_min, bus.v_max);
        }
        if model.reference_buses().contains(&bus.id) {
            for t in 0..horizon {
                c.push("reference_angle", bus.id, t, point.theta[i][t].abs());
            }
        }
    }

    for (k, inv) in model.inverters().iter().enumerate() {
        for t in 0..horizon {
            c.range("inverter_p", inv.id, t, point.p_inv[k][t], inv.p_min, inv.p_max);
            c.range("inverter_q", inv.id, t, point.q_inv[k][t], inv.q_min, inv.q_max);
        }
    }

    for (k, line) in model.lines().iter().enumerate() {
        let (j, o) = (bus_of(line.from_bus), bus_of(line.to_bus));
        for t in 0..horizon {
            let p = point.p_line[k][t];
            match line.side {
                Side::Ac => {
                    let q = point.q_line[k][t];
                    let s = point.s_line[k][t];
                    let (pf, qf) = ac_line_flow(
                        line,
                        point.v[j][t],
                        point.v[o][t],
                        point.theta[j][t],
                        point.theta[o][t],
                    )?;
                    c.push("ac_flow_p", line.id, t, (p - pf).abs());
                    c.push("ac_flow_q", line.id, t, (q - qf).abs());
                    c.push("apparent_def", line.id, t, (s - p - config.xi * q).abs());
                    c.range("ac_capacity", line.id, t, s, line.s_min, line.s_max);
                }
                Side::Dc => {
                    let pf = dc_line_flow(line, point.v[j][t], point.v[o][t])?;
                    c.push("dc_flow", line.id, t, (p - pf).abs());
                    c.range("dc_capacity", line.id, t, p, line.s_min, line.s_max);
                }
            }
        }
    }

    for (k, unit) in model.renewables().iter().enumerate() {
        let ac = model.buses()[bus_of(unit.bus)].side == Side::Ac;
        for t in 0..horizon {
            let p = point.p_ren[k][t];
            c.range("renewable_p", unit.id, t, p, 0.0, unit.forecast[t]);
            let q = point.q_ren[k][t];
            let excess = if ac { (q.abs() - p).max(0.0) } else { q.abs() };
            c.push("renewable_q", unit.id, t, excess);
        }
    }

    for (k, load) in model.loads().iter().enumerate() {
        for t in 0..horizon {
            let pd = load.p_demand[t];
            let lo = if config.allow_load_shedding { 0.0 } else { pd };
            let served = point.p_served[k][t];
            c.range("served_bounds", load.id, t, served, lo, pd);
            let q_expected = if pd > 0.0 {
                load.q_demand[t] / pd * served
            } else {
                load.q_demand[t]
            };
            c.push("served_q", load.id, t, (point.q_served[k][t] - q_expected).abs());
        }
    }

    for (k, ev) in model.evs().iter().enumerate() {
        let cap = ev.group_p_max();
        let e = &point.energy[k];
        c.push("ev_initial", ev.id, 0, (e[0] - ev.group_e_initial()).abs() / base);
        for t in 0..horizon {
            let limit = if ev.is_plugged(t) { cap } else { 0.0 };
            let ch = point.p_ch[k][t];
            let dis = point.p_v2g[k][t];
            c.range("ev_charge", ev.id, t, ch / base, 0.0, limit / base);
            c.range("ev_v2g", ev.id, t, dis / base, 0.0, limit / base);
            c.push("ev_exclusive", ev.id, t, ch.min(dis).max(0.0) / base);
            let expected = energy_step(ev, e[t], ch, dis, t);
            c.push("ev_energy", ev.id, t, (e[t + 1] - expected).abs() / base);
            c.range(
                "ev_energy_bounds",
                ev.id,
                t + 1,
                e[t + 1] / base,
                ev.group_e_min() / base,
                ev.group_e_max() / base,
            );
        }
        let end = e[horizon];
        let start = ev.group_e_initial();
        let shortfall = match config.terminal_energy {
            TerminalEnergy::Free => 0.0,
            TerminalEnergy::AtLeast => (start - end).max(0.0),
            TerminalEnergy::Cyclic => (start - end).abs(),
        };
        c.push("terminal_energy", ev.id, horizon, shortfall / base);
    }

    let residuals = nodal_residuals(model, point)?;
    for (i, bus) in model.buses().iter().enumerate() {
        for t in 0..horizon {
            c.push("balance_p", bus.id, t, residuals.dp[i][t].abs());
            if bus.side == Side::Ac {
                c.push("balance_q", bus.id, t, residuals.dq[i][t].abs());
            }
        }
    }

    Ok(FeasibilityReport {
        tol,
        violations: c.out,
    })
}
