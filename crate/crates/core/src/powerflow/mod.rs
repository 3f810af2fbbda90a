//! Linearized flow laws, nodal balances and the independent feasibility audit.
//!
//! Everything here evaluates a given [`OperatingPoint`]; nothing here solves.

mod audit;

use serde::{Deserialize, Serialize};

use crate::model::{Ev, Line, NetworkModel, Side};

pub use audit::{check_feasibility, FeasibilityReport, Violation};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PowerflowError {
    #[error("line {id} is {found:?}-side, expected {expected:?}")]
    WrongSide { id: u32, expected: Side, found: Side },
    #[error("{field}: expected {expected} entries, found {found}")]
    Dimension {
        field: String,
        expected: usize,
        found: usize,
    },
}

/// Every decision trajectory of one schedule, indexed `[element][hour]` in
/// model order.
///
/// Network quantities are p.u. on `base_kw`. EV powers are kW and energies
/// kWh for the whole group; `energy[e]` has `horizon + 1` entries starting with
/// the initial energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub base_kw: f64,
    pub v: Vec<Vec<f64>>,
    /// Zero on DC buses.
    pub theta: Vec<Vec<f64>>,
    pub p_line: Vec<Vec<f64>>,
    /// Zero on DC lines.
    pub q_line: Vec<Vec<f64>>,
    /// Apparent-power proxy; zero on DC lines.
    pub s_line: Vec<Vec<f64>>,
    /// Positive means DC to AC.
    pub p_inv: Vec<Vec<f64>>,
    pub q_inv: Vec<Vec<f64>>,
    pub p_ren: Vec<Vec<f64>>,
    /// Zero for DC-side units.
    pub q_ren: Vec<Vec<f64>>,
    pub p_ch: Vec<Vec<f64>>,
    pub p_v2g: Vec<Vec<f64>>,
    pub energy: Vec<Vec<f64>>,
    pub p_served: Vec<Vec<f64>>,
    pub q_served: Vec<Vec<f64>>,
}

impl OperatingPoint {
    /// All-zero point sized for `model`, batteries at their initial energy.
    pub fn zeros(model: &NetworkModel, base_kw: f64) -> Self {
        let t = model.horizon();
        let z = |k: usize| vec![vec![0.0; t]; k];
        OperatingPoint {
            base_kw,
            v: z(model.buses().len()),
            theta: z(model.buses().len()),
            p_line: z(model.lines().len()),
            q_line: z(model.lines().len()),
            s_line: z(model.lines().len()),
            p_inv: z(model.inverters().len()),
            q_inv: z(model.inverters().len()),
            p_ren: z(model.renewables().len()),
            q_ren: z(model.renewables().len()),
            p_ch: z(model.evs().len()),
            p_v2g: z(model.evs().len()),
            energy: model
                .evs()
                .iter()
                .map(|e| vec![e.group_e_initial(); t + 1])
                .collect(),
            p_served: z(model.loads().len()),
            q_served: z(model.loads().len()),
        }
    }

    pub fn check_dimensions(&self, model: &NetworkModel) -> Result<(), PowerflowError> {
        let t = model.horizon();
        let fields: [(&str, &Vec<Vec<f64>>, usize, usize); 14] = [
            ("v", &self.v, model.buses().len(), t),
            ("theta", &self.theta, model.buses().len(), t),
            ("p_line", &self.p_line, model.lines().len(), t),
            ("q_line", &self.q_line, model.lines().len(), t),
            ("s_line", &self.s_line, model.lines().len(), t),
            ("p_inv", &self.p_inv, model.inverters().len(), t),
            ("q_inv", &self.q_inv, model.inverters().len(), t),
            ("p_ren", &self.p_ren, model.renewables().len(), t),
            ("q_ren", &self.q_ren, model.renewables().len(), t),
            ("p_ch", &self.p_ch, model.evs().len(), t),
            ("p_v2g", &self.p_v2g, model.evs().len(), t),
            ("energy", &self.energy, model.evs().len(), t + 1),
            ("p_served", &self.p_served, model.loads().len(), t),
            ("q_served", &self.q_served, model.loads().len(), t),
        ];
        for (name, rows, count, len) in fields {
            if rows.len() != count {
                return Err(PowerflowError::Dimension {
                    field: name.to_string(),
                    expected: count,
                    found: rows.len(),
                });
            }
            if let Some(bad) = rows.iter().find(|r| r.len() != len) {
                return Err(PowerflowError::Dimension {
                    field: name.to_string(),
                    expected: len,
                    found: bad.len(),
                });
            }
        }
        Ok(())
    }
}

fn expect_side(line: &Line, side: Side) -> Result<(), PowerflowError> {
    if line.side == side {
        Ok(())
    } else {
        Err(PowerflowError::WrongSide {
            id: line.id,
            expected: side,
            found: line.side,
        })
    }
}

/// First-order AC flow from `j` to `o`: `(p, q)`.
pub fn ac_line_flow(
    line: &Line,
    v_j: f64,
    v_o: f64,
    theta_j: f64,
    theta_o: f64,
) -> Result<(f64, f64), PowerflowError> {
    expect_side(line, Side::Ac)?;
    let (dv, dth) = (v_j - v_o, theta_j - theta_o);
    Ok((-line.g * dv + line.b * dth, line.b * dv + line.g * dth))
}

/// Resistive DC flow from `j` to `o`.
pub fn dc_line_flow(line: &Line, v_j: f64, v_o: f64) -> Result<f64, PowerflowError> {
    expect_side(line, Side::Dc)?;
    Ok((v_j - v_o) / line.r)
}

/// Linear apparent-power proxy `p + ξ·q`.
pub fn apparent_proxy(p: f64, q: f64, xi: f64) -> f64 {
    p + xi * q
}

/// Group energy (kWh) at the end of `hour` given the energy at its start and
/// the hour's charge and V2G powers (kW).
pub fn energy_step(ev: &Ev, e_prev: f64, p_ch: f64, p_v2g: f64, hour: usize) -> f64 {
    e_prev - ev.travel_energy(hour) - p_v2g / ev.eta_v2g + p_ch * ev.eta_ch
}

/// Nodal mismatches `[bus][hour]`. `dq` is zero on DC buses.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalResiduals {
    pub dp: Vec<Vec<f64>>,
    pub dq: Vec<Vec<f64>>,
}

impl NodalResiduals {
    pub fn max_abs(&self) -> f64 {
        self.dp
            .iter()
            .chain(&self.dq)
            .flatten()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Injections minus withdrawals at every bus and hour.
pub fn nodal_residuals(
    model: &NetworkModel,
    point: &OperatingPoint,
) -> Result<NodalResiduals, PowerflowError> {
    point.check_dimensions(model)?;
    let horizon = model.horizon();
    let nb = model.buses().len();
    let mut dp = vec![vec![0.0; horizon]; nb];
    let mut dq = vec![vec![0.0; horizon]; nb];
    let base = point.base_kw;
    for (i, bus) in model.buses().iter().enumerate() {
        let m = model.members(i);
        let ac = bus.side == Side::Ac;
        for t in 0..horizon {
            let mut p = 0.0;
            let mut q = 0.0;
            for &e in &m.evs {
                p += (point.p_v2g[e][t] - point.p_ch[e][t]) / base;
            }
            for &k in m.pv.iter().chain(&m.wt) {
                p += point.p_ren[k][t];
                q += point.q_ren[k][t];
            }
            for &c in &m.inverters {
                if ac {
                    p += point.p_inv[c][t];
                    q += point.q_inv[c][t];
                } else {
                    p -= point.p_inv[c][t];
                }
            }
            for &l in &m.lines_to {
                p += point.p_line[l][t];
                q += point.q_line[l][t];
            }
            for &l in &m.lines_from {
                p -= point.p_line[l][t];
                q -= point.q_line[l][t];
            }
            for &d in &m.loads {
                p -= point.p_served[d][t];
                q -= point.q_served[d][t];
            }
            dp[i][t] = p;
            if ac {
                dq[i][t] = q;
            }
        }
    }
    Ok(NodalResiduals { dp, dq })
}
