//! Network and fleet data: types, JSON ingestion, validation and scenario scaling.

mod io;
pub mod reference;
mod types;
mod validate;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub use io::{load_model, parse_model, to_json, write_model};
pub use types::{
    Bus, BusMembers, Ev, FleetMode, Inverter, Line, LoadPoint, RenewableKind, RenewableUnit,
    ScenarioConfig, Side, TerminalEnergy,
};

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed input: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("{element}: {message}")]
    Validation { element: String, message: String },
}

impl ModelError {
    pub(crate) fn invalid(element: impl Into<String>, message: impl Into<String>) -> Self {
        ModelError::Validation {
            element: element.into(),
            message: message.into(),
        }
    }
}

/// The JSON input document, field for field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub buses: Vec<Bus>,
    pub lines: Vec<Line>,
    #[serde(default)]
    pub inverters: Vec<Inverter>,
    #[serde(default)]
    pub renewables: Vec<RenewableUnit>,
    #[serde(default)]
    pub loads: Vec<LoadPoint>,
    #[serde(default)]
    pub evs: Vec<Ev>,
    pub config: ScenarioConfig,
}

/// A validated network. Immutable once built; scenario changes produce copies.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkModel {
    buses: Vec<Bus>,
    lines: Vec<Line>,
    inverters: Vec<Inverter>,
    renewables: Vec<RenewableUnit>,
    loads: Vec<LoadPoint>,
    evs: Vec<Ev>,
    horizon: usize,
    bus_index: HashMap<u32, usize>,
    members: Vec<BusMembers>,
    reference_buses: Vec<u32>,
}

impl NetworkModel {
    /// Validates a document and splits it into the network and its configuration.
    pub fn from_document(doc: ModelDocument) -> Result<(NetworkModel, ScenarioConfig), ModelError> {
        let ModelDocument {
            buses,
            lines,
            inverters,
            renewables,
            mut loads,
            evs,
            config,
        } = doc;
        validate::check_config(&config)?;
        let horizon = config.horizon;
        let bus_index = validate::check_buses(&buses)?;
        let side_of = |id: u32| bus_index.get(&id).map(|&i| buses[i].side);
        validate::check_lines(&lines, &side_of)?;
        validate::check_inverters(&inverters, &side_of)?;
        validate::check_renewables(&renewables, &side_of, horizon)?;
        validate::check_loads(&mut loads, &side_of, horizon)?;
        validate::check_evs(&evs, &side_of, horizon)?;
        validate::check_connectivity(&buses, &bus_index, &lines, &inverters)?;

        let mut model = NetworkModel {
            buses,
            lines,
            inverters,
            renewables,
            loads,
            evs,
            horizon,
            bus_index,
            members: Vec::new(),
            reference_buses: Vec::new(),
        };
        model.members = model.derive_members();
        model.reference_buses = model.derive_reference_buses();
        Ok((model, config))
    }

    pub fn to_document(&self, config: &ScenarioConfig) -> ModelDocument {
        ModelDocument {
            buses: self.buses.clone(),
            lines: self.lines.clone(),
            inverters: self.inverters.clone(),
            renewables: self.renewables.clone(),
            loads: self.loads.clone(),
            evs: self.evs.clone(),
            config: config.clone(),
        }
    }

    pub fn buses(&self) -> &[Bus] {
        &self.buses
    }
    pub fn lines(&self) -> &[Line] {
        &self.lines
    }
    pub fn inverters(&self) -> &[Inverter] {
        &self.inverters
    }
    pub fn renewables(&self) -> &[RenewableUnit] {
        &self.renewables
    }
    pub fn loads(&self) -> &[LoadPoint] {
        &self.loads
    }
    pub fn evs(&self) -> &[Ev] {
        &self.evs
    }
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// One AC bus per AC island, angle pinned to zero there.
    pub fn reference_buses(&self) -> &[u32] {
        &self.reference_buses
    }

    pub fn bus_position(&self, id: u32) -> Option<usize> {
        self.bus_index.get(&id).copied()
    }

    pub(crate) fn bus_pos(&self, id: u32) -> usize {
        self.bus_index[&id]
    }

    /// Elements placed on the bus at position `bus`.
    pub fn members(&self, bus: usize) -> &BusMembers {
        &self.members[bus]
    }

    /// Total requested real demand over the horizon, p.u.·h.
    pub fn total_demand(&self) -> f64 {
        self.loads.iter().flat_map(|l| l.p_demand.iter()).sum()
    }

    /// Renewable forecast summed over all units, per hour.
    pub fn renewable_forecast_by_hour(&self) -> Vec<f64> {
        (0..self.horizon)
            .map(|t| self.renewables.iter().map(|r| r.forecast[t]).sum())
            .collect()
    }

    pub fn demand_by_hour(&self) -> Vec<f64> {
        (0..self.horizon)
            .map(|t| self.loads.iter().map(|l| l.p_demand[t]).sum())
            .collect()
    }

    fn derive_members(&self) -> Vec<BusMembers> {
        let mut members = vec![BusMembers::default(); self.buses.len()];
        for (k, inv) in self.inverters.iter().enumerate() {
            members[self.bus_pos(inv.ac_bus)].inverters.push(k);
            members[self.bus_pos(inv.dc_bus)].inverters.push(k);
        }
        for (k, ev) in self.evs.iter().enumerate() {
            members[self.bus_pos(ev.station_bus)].evs.push(k);
        }
        for (k, load) in self.loads.iter().enumerate() {
            members[self.bus_pos(load.bus)].loads.push(k);
        }
        for (k, unit) in self.renewables.iter().enumerate() {
            let m = &mut members[self.bus_pos(unit.bus)];
            match unit.kind {
                RenewableKind::Pv => m.pv.push(k),
                RenewableKind::Wt => m.wt.push(k),
            }
        }
        for (k, line) in self.lines.iter().enumerate() {
            members[self.bus_pos(line.to_bus)].lines_to.push(k);
            members[self.bus_pos(line.from_bus)].lines_from.push(k);
        }
        members
    }

    /// Lowest-id bus of each island of the AC-line graph.
    fn derive_reference_buses(&self) -> Vec<u32> {
        let n = self.buses.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for line in self.lines.iter().filter(|l| l.side == Side::Ac) {
            let a = find(&mut parent, self.bus_pos(line.from_bus));
            let b = find(&mut parent, self.bus_pos(line.to_bus));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut best: HashMap<usize, u32> = HashMap::new();
        for (i, bus) in self.buses.iter().enumerate() {
            if bus.side != Side::Ac {
                continue;
            }
            let root = find(&mut parent, i);
            best.entry(root)
                .and_modify(|id| *id = (*id).min(bus.id))
                .or_insert(bus.id);
        }
        let mut refs: Vec<u32> = best.into_values().collect();
        refs.sort_unstable();
        refs
    }

    fn rebuild(mut self) -> Self {
        self.members = self.derive_members();
        self.reference_buses = self.derive_reference_buses();
        self
    }
}

/// Stride used to number vehicles when a fleet group is expanded.
pub const EXPAND_STRIDE: u32 = 1000;

/// Folds the sweep multipliers (and the fleet mode) into the data.
///
/// PV forecasts scale with `irradiance_fraction`, inverter bounds with
/// `inverter_capacity_fraction`, and both degradation coefficients with
/// `deg_multiplier`. The returned config has all three multipliers reset to 1,
/// so applying the function twice is the same as applying it once.
pub fn apply_scenario(
    model: &NetworkModel,
    config: &ScenarioConfig,
) -> (NetworkModel, ScenarioConfig) {
    let mut out = model.clone();
    let irr = config.irradiance_fraction;
    let cap = config.inverter_capacity_fraction;
    for unit in out
        .renewables
        .iter_mut()
        .filter(|u| u.kind == RenewableKind::Pv)
    {
        for f in unit.forecast.iter_mut() {
            *f *= irr;
        }
    }
    for inv in out.inverters.iter_mut() {
        inv.p_min *= cap;
        inv.p_max *= cap;
        inv.q_min *= cap;
        inv.q_max *= cap;
    }
    if config.fleet_mode == FleetMode::Expand && out.evs.iter().any(|e| e.count > 1) {
        out.evs = out
            .evs
            .iter()
            .flat_map(|ev| {
                (0..ev.count).map(move |k| Ev {
                    id: if ev.count == 1 {
                        ev.id
                    } else {
                        ev.id * EXPAND_STRIDE + k
                    },
                    count: 1,
                    ..ev.clone()
                })
            })
            .collect();
    }
    let mut cfg = config.clone();
    cfg.beta1 *= config.deg_multiplier;
    cfg.beta2 *= config.deg_multiplier;
    cfg.deg_multiplier = 1.0;
    cfg.irradiance_fraction = 1.0;
    cfg.inverter_capacity_fraction = 1.0;
    (out.rebuild(), cfg)
}
