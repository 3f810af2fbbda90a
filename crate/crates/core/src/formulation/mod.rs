//! Translation of a network and scenario into a [`QpProblem`] with one
//! exclusivity pair per plugged EV-hour.
//!
//! Network quantities stay in p.u. EV powers become p.u. of `base_mva` (kW)
//! and energies p.u.·h, so every nodal balance row is homogeneous.

mod layout;
pub mod units;

use serde::{Deserialize, Serialize};

use crate::linalg::CsrMatrix;
use crate::model::{apply_scenario, NetworkModel, RenewableKind, ScenarioConfig, Side, TerminalEnergy};
use crate::powerflow::OperatingPoint;
use crate::qp::{ExclusivityPair, QpProblem};

pub use layout::{Layout, VarName, VariableIndex};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FormulationError {
    #[error("config horizon {config} does not match the model horizon {model}")]
    Horizon { model: usize, config: usize },
    #[error("coefficient for {what} is not finite after unit conversion")]
    Overflow { what: String },
    #[error("solution vector has {found} entries, expected {expected}")]
    Length { expected: usize, found: usize },
}

/// A built problem together with what is needed to interpret its columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Formulation {
    pub qp: QpProblem,
    pub layout: Layout,
    /// The scenario-applied model the rows were built from.
    pub model: NetworkModel,
    /// The scenario-applied config (multipliers folded in).
    pub config: ScenarioConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveTerms {
    pub lost_load: f64,
    pub degradation: f64,
}

struct Rows {
    n: usize,
    trip: Vec<(usize, usize, f64)>,
    rhs: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Rows {
    fn new(n: usize) -> Self {
        Rows {
            n,
            trip: Vec::new(),
            rhs: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
        }
    }

    fn eq(&mut self, coeffs: &[(usize, f64)], rhs: f64) {
        let r = self.rhs.len();
        self.trip.extend(coeffs.iter().map(|&(c, v)| (r, c, v)));
        self.rhs.push(rhs);
    }

    fn range(&mut self, coeffs: &[(usize, f64)], lo: f64, hi: f64) {
        let r = self.lower.len();
        self.trip.extend(coeffs.iter().map(|&(c, v)| (r, c, v)));
        self.lower.push(lo);
        self.upper.push(hi);
    }

    fn eq_matrix(&self) -> CsrMatrix {
        CsrMatrix::from_triplets(self.rhs.len(), self.n, &self.trip)
    }

    fn range_matrix(&self) -> CsrMatrix {
        CsrMatrix::from_triplets(self.lower.len(), self.n, &self.trip)
    }
}

fn finite(what: &str, v: f64) -> Result<f64, FormulationError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(FormulationError::Overflow {
            what: what.to_string(),
        })
    }
}

/// Reactive power drawn per unit of served real power, and the constant part.
fn reactive_share(p_demand: f64, q_demand: f64) -> (f64, f64) {
    if p_demand > 0.0 {
        (q_demand / p_demand, 0.0)
    } else {
        (0.0, q_demand)
    }
}

/// Applies the scenario multipliers and builds the relaxation.
pub fn build(model: &NetworkModel, config: &ScenarioConfig) -> Result<Formulation, FormulationError> {
    if model.horizon() != config.horizon {
        return Err(FormulationError::Horizon {
            model: model.horizon(),
            config: config.horizon,
        });
    }
    let (model, config) = apply_scenario(model, config);
    let horizon = model.horizon();
    let base = config.base_mva;
    let side_of = |bus: u32| model.buses()[model.bus_pos(bus)].side;

    let mut lay = Layout::default();
    for bus in model.buses() {
        for t in 0..horizon {
            lay.push(VarName::V, bus.id, t);
        }
    }
    for bus in model.buses().iter().filter(|b| b.side == Side::Ac) {
        for t in 0..horizon {
            lay.push(VarName::Theta, bus.id, t);
        }
    }
    for line in model.lines() {
        for t in 0..horizon {
            lay.push(VarName::PLine, line.id, t);
        }
    }
    let ac_lines: Vec<_> = model.lines().iter().filter(|l| l.side == Side::Ac).collect();
    for name in [VarName::QLine, VarName::SLine] {
        for line in &ac_lines {
            for t in 0..horizon {
                lay.push(name, line.id, t);
            }
        }
    }
    for name in [VarName::PInv, VarName::QInv] {
        for inv in model.inverters() {
            for t in 0..horizon {
                lay.push(name, inv.id, t);
            }
        }
    }
    for (kind, p_name, q_name) in [
        (RenewableKind::Pv, VarName::PPv, VarName::QPv),
        (RenewableKind::Wt, VarName::PWt, VarName::QWt),
    ] {
        let units: Vec<_> = model.renewables().iter().filter(|u| u.kind == kind).collect();
        for u in &units {
            for t in 0..horizon {
                lay.push(p_name, u.id, t);
            }
        }
        for u in units.iter().filter(|u| side_of(u.bus) == Side::Ac) {
            for t in 0..horizon {
                lay.push(q_name, u.id, t);
            }
        }
    }
    for name in [VarName::PCh, VarName::PV2g, VarName::E] {
        for ev in model.evs() {
            for t in 0..horizon {
                lay.push(name, ev.id, t);
            }
        }
    }
    for load in model.loads() {
        for t in 0..horizon {
            lay.push(VarName::PServed, load.id, t);
        }
    }

    let n = lay.len();
    let mut qp = QpProblem::new(n);
    let col = |name, id, t| lay.col(name, id, t);

    // Objective.
    let k_lost = finite("k_lost", units::lost_load_cost_per_pu(&config))?;
    for load in model.loads() {
        for t in 0..horizon {
            qp.c[col(VarName::PServed, load.id, t)] = -k_lost;
            qp.offset += k_lost * load.p_demand[t];
        }
    }
    let lin = finite("beta1", units::v2g_linear_cost_per_pu(&config))?;
    for ev in model.evs() {
        let quad = finite("beta2", units::v2g_quadratic_cost_per_pu(&config, ev.count))?;
        for t in 0..horizon {
            let j = col(VarName::PV2g, ev.id, t);
            qp.c[j] = lin;
            qp.q[j] = quad;
        }
    }
    finite("objective offset", qp.offset)?;

    // Bounds.
    for bus in model.buses() {
        for t in 0..horizon {
            let j = col(VarName::V, bus.id, t);
            qp.lower[j] = bus.v_min;
            qp.upper[j] = bus.v_max;
        }
    }
    for &id in model.reference_buses() {
        for t in 0..horizon {
            let j = col(VarName::Theta, id, t);
            qp.lower[j] = 0.0;
            qp.upper[j] = 0.0;
        }
    }
    for line in model.lines() {
        let name = match line.side {
            Side::Ac => VarName::SLine,
            Side::Dc => VarName::PLine,
        };
        for t in 0..horizon {
            let j = col(name, line.id, t);
            qp.lower[j] = line.s_min;
            qp.upper[j] = line.s_max;
        }
    }
    for inv in model.inverters() {
        for t in 0..horizon {
            let j = col(VarName::PInv, inv.id, t);
            qp.lower[j] = inv.p_min;
            qp.upper[j] = inv.p_max;
            let j = col(VarName::QInv, inv.id, t);
            qp.lower[j] = inv.q_min;
            qp.upper[j] = inv.q_max;
        }
    }
    for u in model.renewables() {
        let name = match u.kind {
            RenewableKind::Pv => VarName::PPv,
            RenewableKind::Wt => VarName::PWt,
        };
        for t in 0..horizon {
            let j = col(name, u.id, t);
            qp.lower[j] = 0.0;
            qp.upper[j] = u.forecast[t];
        }
    }
    for ev in model.evs() {
        let cap = ev.group_p_max() / base;
        for t in 0..horizon {
            let limit = if ev.is_plugged(t) { cap } else { 0.0 };
            for name in [VarName::PCh, VarName::PV2g] {
                let j = col(name, ev.id, t);
                qp.lower[j] = 0.0;
                qp.upper[j] = limit;
            }
            let j = col(VarName::E, ev.id, t);
            qp.lower[j] = ev.group_e_min() / base;
            qp.upper[j] = ev.group_e_max() / base;
        }
        let last = col(VarName::E, ev.id, horizon - 1);
        let e0 = ev.group_e_initial() / base;
        match config.terminal_energy {
            TerminalEnergy::Free => {}
            TerminalEnergy::AtLeast => qp.lower[last] = qp.lower[last].max(e0),
            TerminalEnergy::Cyclic => {
                qp.lower[last] = e0;
                qp.upper[last] = e0;
            }
        }
    }
    for load in model.loads() {
        for t in 0..horizon {
            let j = col(VarName::PServed, load.id, t);
            qp.upper[j] = load.p_demand[t];
            qp.lower[j] = if config.allow_load_shedding {
                0.0
            } else {
                load.p_demand[t]
            };
        }
    }

    // Equalities.
    let mut eq = Rows::new(n);
    for t in 0..horizon {
        for line in model.lines() {
            let p = col(VarName::PLine, line.id, t);
            let (vj, vo) = (col(VarName::V, line.from_bus, t), col(VarName::V, line.to_bus, t));
            match line.side {
                Side::Ac => {
                    let q = col(VarName::QLine, line.id, t);
                    let s = col(VarName::SLine, line.id, t);
                    let tj = col(VarName::Theta, line.from_bus, t);
                    let to = col(VarName::Theta, line.to_bus, t);
                    let (g, b) = (line.g, line.b);
                    // p = -G(vj - vo) + B(θj - θo)
                    eq.eq(&[(p, 1.0), (vj, g), (vo, -g), (tj, -b), (to, b)], 0.0);
                    // q = B(vj - vo) + G(θj - θo)
                    eq.eq(&[(q, 1.0), (vj, -b), (vo, b), (tj, -g), (to, g)], 0.0);
                    // s = p + ξq
                    eq.eq(&[(s, 1.0), (p, -1.0), (q, -config.xi)], 0.0);
                }
                Side::Dc => {
                    // r·p = vj - vo
                    eq.eq(&[(p, line.r), (vj, -1.0), (vo, 1.0)], 0.0);
                }
            }
        }
    }
    for (i, bus) in model.buses().iter().enumerate() {
        let m = model.members(i);
        let ac = bus.side == Side::Ac;
        for t in 0..horizon {
            let mut p_row = Vec::new();
            let mut q_row = Vec::new();
            let mut q_rhs = 0.0;
            for &e in &m.evs {
                let id = model.evs()[e].id;
                p_row.push((col(VarName::PV2g, id, t), 1.0));
                p_row.push((col(VarName::PCh, id, t), -1.0));
            }
            for &k in m.pv.iter().chain(&m.wt) {
                let u = &model.renewables()[k];
                let (pn, qn) = match u.kind {
                    RenewableKind::Pv => (VarName::PPv, VarName::QPv),
                    RenewableKind::Wt => (VarName::PWt, VarName::QWt),
                };
                p_row.push((col(pn, u.id, t), 1.0));
                if ac {
                    q_row.push((col(qn, u.id, t), 1.0));
                }
            }
            for &c in &m.inverters {
                let id = model.inverters()[c].id;
                p_row.push((col(VarName::PInv, id, t), if ac { 1.0 } else { -1.0 }));
                if ac {
                    q_row.push((col(VarName::QInv, id, t), 1.0));
                }
            }
            for (lines, sign) in [(&m.lines_to, 1.0), (&m.lines_from, -1.0)] {
                for &l in lines.iter() {
                    let id = model.lines()[l].id;
                    p_row.push((col(VarName::PLine, id, t), sign));
                    if ac {
                        q_row.push((col(VarName::QLine, id, t), sign));
                    }
                }
            }
            for &d in &m.loads {
                let load = &model.loads()[d];
                let j = col(VarName::PServed, load.id, t);
                p_row.push((j, -1.0));
                let (share, constant) = reactive_share(load.p_demand[t], load.q_demand[t]);
                if ac {
                    q_row.push((j, -share));
                    q_rhs += constant;
                }
            }
            eq.eq(&p_row, 0.0);
            if ac {
                eq.eq(&q_row, q_rhs);
            }
        }
    }
    let mut pairs = Vec::new();
    for ev in model.evs() {
        let travel_cap = ev.group_p_max() / base;
        for t in 0..horizon {
            let ch = col(VarName::PCh, ev.id, t);
            let dis = col(VarName::PV2g, ev.id, t);
            let e = col(VarName::E, ev.id, t);
            let drive = ev.travel_profile[t] * travel_cap;
            // E_t - E_{t-1} - η_ch p_ch + p_v2g / η_v2g = -O_dis p̄
            let mut row = vec![(e, 1.0), (ch, -ev.eta_ch), (dis, 1.0 / ev.eta_v2g)];
            let mut rhs = -drive;
            if t == 0 {
                rhs += ev.group_e_initial() / base;
            } else {
                row.push((col(VarName::E, ev.id, t - 1), -1.0));
            }
            eq.eq(&row, finite("EV energy", rhs)?);
            if ev.is_plugged(t) {
                pairs.push(ExclusivityPair {
                    ev: ev.id,
                    hour: t,
                    col_ch: ch,
                    col_v2g: dis,
                });
            }
        }
    }

    // Renewable reactive capability: -p <= q <= p.
    let mut rng = Rows::new(n);
    for u in model.renewables().iter().filter(|u| side_of(u.bus) == Side::Ac) {
        let (pn, qn) = match u.kind {
            RenewableKind::Pv => (VarName::PPv, VarName::QPv),
            RenewableKind::Wt => (VarName::PWt, VarName::QWt),
        };
        for t in 0..horizon {
            let p = col(pn, u.id, t);
            let q = col(qn, u.id, t);
            rng.range(&[(q, 1.0), (p, -1.0)], f64::NEG_INFINITY, 0.0);
            rng.range(&[(q, 1.0), (p, 1.0)], 0.0, f64::INFINITY);
        }
    }

    qp = qp
        .with_equalities(eq.eq_matrix(), eq.rhs)
        .with_inequalities(rng.range_matrix(), rng.lower, rng.upper);
    qp.pairs = pairs;
    Ok(Formulation {
        qp,
        layout: lay,
        model,
        config,
    })
}

impl Formulation {
    /// Maps a QP vector back to domain units.
    pub fn extract(&self, x: &[f64]) -> Result<OperatingPoint, FormulationError> {
        if x.len() != self.layout.len() {
            return Err(FormulationError::Length {
                expected: self.layout.len(),
                found: x.len(),
            });
        }
        let m = &self.model;
        let base = self.config.base_mva;
        let mut pt = OperatingPoint::zeros(m, base);
        let mut pos = std::collections::HashMap::new();
        for (k, b) in m.buses().iter().enumerate() {
            pos.insert((VarName::V, b.id), k);
            pos.insert((VarName::Theta, b.id), k);
        }
        for (k, l) in m.lines().iter().enumerate() {
            for n in [VarName::PLine, VarName::QLine, VarName::SLine] {
                pos.insert((n, l.id), k);
            }
        }
        for (k, c) in m.inverters().iter().enumerate() {
            pos.insert((VarName::PInv, c.id), k);
            pos.insert((VarName::QInv, c.id), k);
        }
        for (k, u) in m.renewables().iter().enumerate() {
            for n in [VarName::PPv, VarName::QPv, VarName::PWt, VarName::QWt] {
                pos.insert((n, u.id), k);
            }
        }
        for (k, e) in m.evs().iter().enumerate() {
            for n in [VarName::PCh, VarName::PV2g, VarName::E] {
                pos.insert((n, e.id), k);
            }
        }
        for (k, d) in m.loads().iter().enumerate() {
            pos.insert((VarName::PServed, d.id), k);
        }
        for (j, var) in self.layout.variables().iter().enumerate() {
            let k = pos[&(var.name, var.element)];
            let t = var.hour;
            let v = x[j];
            match var.name {
                VarName::V => pt.v[k][t] = v,
                VarName::Theta => pt.theta[k][t] = v,
                VarName::PLine => pt.p_line[k][t] = v,
                VarName::QLine => pt.q_line[k][t] = v,
                VarName::SLine => pt.s_line[k][t] = v,
                VarName::PInv => pt.p_inv[k][t] = v,
                VarName::QInv => pt.q_inv[k][t] = v,
                VarName::PPv | VarName::PWt => pt.p_ren[k][t] = v,
                VarName::QPv | VarName::QWt => pt.q_ren[k][t] = v,
                VarName::PCh => pt.p_ch[k][t] = v * base,
                VarName::PV2g => pt.p_v2g[k][t] = v * base,
                VarName::E => pt.energy[k][t + 1] = v * base,
                VarName::PServed => pt.p_served[k][t] = v,
            }
        }
        for (k, load) in m.loads().iter().enumerate() {
            for t in 0..m.horizon() {
                let (share, constant) = reactive_share(load.p_demand[t], load.q_demand[t]);
                pt.q_served[k][t] = share * pt.p_served[k][t] + constant;
            }
        }
        Ok(pt)
    }

    /// The two objective terms at `x`, in dollars.
    pub fn objective_terms(&self, x: &[f64]) -> ObjectiveTerms {
        let mut lost = self.qp.offset;
        let mut deg = 0.0;
        for (j, var) in self.layout.variables().iter().enumerate() {
            let term = 0.5 * self.qp.q[j] * x[j] * x[j] + self.qp.c[j] * x[j];
            match var.name {
                VarName::PServed => lost += term,
                VarName::PV2g => deg += term,
                _ => {}
            }
        }
        ObjectiveTerms {
            lost_load: lost,
            degradation: deg,
        }
    }
}
