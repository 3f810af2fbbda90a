use std::collections::{HashMap, HashSet};

use super::types::*;
use super::ModelError;

type SideOf<'a> = dyn Fn(u32) -> Option<Side> + 'a;

fn finite(element: &str, name: &str, value: f64) -> Result<(), ModelError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(ModelError::invalid(element, format!("{name} must be finite")))
    }
}

fn profile(element: &str, name: &str, values: &[f64], horizon: usize) -> Result<(), ModelError> {
    if values.len() != horizon {
        return Err(ModelError::invalid(
            element,
            format!("{name} has {} entries, expected {horizon}", values.len()),
        ));
    }
    if let Some(t) = values.iter().position(|v| !v.is_finite()) {
        return Err(ModelError::invalid(
            element,
            format!("{name}[{t}] is not finite"),
        ));
    }
    Ok(())
}

fn unique_ids(kind: &str, ids: impl Iterator<Item = u32>) -> Result<(), ModelError> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(ModelError::invalid(
                format!("{kind} {id}"),
                "duplicate id",
            ));
        }
    }
    Ok(())
}

pub(super) fn check_config(c: &ScenarioConfig) -> Result<(), ModelError> {
    let el = "config";
    for (name, v) in [
        ("k_lost", c.k_lost),
        ("beta1", c.beta1),
        ("beta2", c.beta2),
        ("xi", c.xi),
        ("deg_multiplier", c.deg_multiplier),
        ("irradiance_fraction", c.irradiance_fraction),
        ("inverter_capacity_fraction", c.inverter_capacity_fraction),
        ("base_mva", c.base_mva),
    ] {
        finite(el, name, v)?;
    }
    if c.horizon == 0 {
        return Err(ModelError::invalid(el, "horizon must be at least one hour"));
    }
    if c.k_lost < 0.0 {
        return Err(ModelError::invalid(el, "k_lost must be non-negative"));
    }
    if c.beta2 < 0.0 {
        return Err(ModelError::invalid(
            el,
            "beta2 must be non-negative (convex degradation cost)",
        ));
    }
    if c.deg_multiplier < 0.0 {
        return Err(ModelError::invalid(el, "deg_multiplier must be non-negative"));
    }
    for (name, v) in [
        ("irradiance_fraction", c.irradiance_fraction),
        ("inverter_capacity_fraction", c.inverter_capacity_fraction),
    ] {
        if !(0.0..=1.0).contains(&v) {
            return Err(ModelError::invalid(el, format!("{name} must lie in [0, 1]")));
        }
    }
    if c.base_mva <= 0.0 {
        return Err(ModelError::invalid(el, "base_mva must be positive"));
    }
    Ok(())
}

pub(super) fn check_buses(buses: &[Bus]) -> Result<HashMap<u32, usize>, ModelError> {
    if buses.is_empty() {
        return Err(ModelError::invalid("network", "no buses"));
    }
    unique_ids("bus", buses.iter().map(|b| b.id))?;
    for bus in buses {
        let el = format!("bus {}", bus.id);
        finite(&el, "v_min", bus.v_min)?;
        finite(&el, "v_max", bus.v_max)?;
        if bus.v_min <= 0.0 {
            return Err(ModelError::invalid(el, "v_min must be positive"));
        }
        if bus.v_min > bus.v_max {
            return Err(ModelError::invalid(el, "v_min exceeds v_max"));
        }
    }
    Ok(buses.iter().enumerate().map(|(i, b)| (b.id, i)).collect())
}

fn bus_side(side_of: &SideOf, el: &str, what: &str, id: u32) -> Result<Side, ModelError> {
    side_of(id).ok_or_else(|| ModelError::invalid(el, format!("{what} {id} does not exist")))
}

pub(super) fn check_lines(lines: &[Line], side_of: &SideOf) -> Result<(), ModelError> {
    unique_ids("line", lines.iter().map(|l| l.id))?;
    for line in lines {
        let el = format!("line {}", line.id);
        for (name, v) in [
            ("g", line.g),
            ("b", line.b),
            ("r", line.r),
            ("s_min", line.s_min),
            ("s_max", line.s_max),
        ] {
            finite(&el, name, v)?;
        }
        let from = bus_side(side_of, &el, "from_bus", line.from_bus)?;
        let to = bus_side(side_of, &el, "to_bus", line.to_bus)?;
        if line.from_bus == line.to_bus {
            return Err(ModelError::invalid(el, "line endpoints coincide"));
        }
        if from != line.side || to != line.side {
            return Err(ModelError::invalid(
                el,
                "line endpoints must share the line's side",
            ));
        }
        if line.side == Side::Dc && line.r <= 0.0 {
            return Err(ModelError::invalid(el, "DC line resistance must be positive"));
        }
        if !(line.s_min <= 0.0 && 0.0 <= line.s_max) {
            return Err(ModelError::invalid(el, "capacity must satisfy s_min <= 0 <= s_max"));
        }
    }
    Ok(())
}

pub(super) fn check_inverters(inverters: &[Inverter], side_of: &SideOf) -> Result<(), ModelError> {
    unique_ids("inverter", inverters.iter().map(|c| c.id))?;
    for inv in inverters {
        let el = format!("inverter {}", inv.id);
        for (name, v) in [
            ("p_min", inv.p_min),
            ("p_max", inv.p_max),
            ("q_min", inv.q_min),
            ("q_max", inv.q_max),
        ] {
            finite(&el, name, v)?;
        }
        if bus_side(side_of, &el, "ac_bus", inv.ac_bus)? != Side::Ac {
            return Err(ModelError::invalid(el, "ac_bus must be AC-side"));
        }
        if bus_side(side_of, &el, "dc_bus", inv.dc_bus)? != Side::Dc {
            return Err(ModelError::invalid(el, "dc_bus must be DC-side"));
        }
        if inv.p_min > inv.p_max {
            return Err(ModelError::invalid(el, "p_min exceeds p_max"));
        }
        if inv.q_min > inv.q_max {
            return Err(ModelError::invalid(el, "q_min exceeds q_max"));
        }
    }
    Ok(())
}

pub(super) fn check_renewables(
    units: &[RenewableUnit],
    side_of: &SideOf,
    horizon: usize,
) -> Result<(), ModelError> {
    unique_ids("renewable", units.iter().map(|u| u.id))?;
    for unit in units {
        let el = format!("renewable {}", unit.id);
        bus_side(side_of, &el, "bus", unit.bus)?;
        profile(&el, "forecast", &unit.forecast, horizon)?;
        if let Some(t) = unit.forecast.iter().position(|&f| f < 0.0) {
            return Err(ModelError::invalid(el, format!("forecast[{t}] is negative")));
        }
    }
    Ok(())
}

/// Also fills an omitted reactive profile and zeroes reactive demand on DC buses.
pub(super) fn check_loads(
    loads: &mut [LoadPoint],
    side_of: &SideOf,
    horizon: usize,
) -> Result<(), ModelError> {
    unique_ids("load", loads.iter().map(|l| l.id))?;
    for load in loads.iter_mut() {
        let el = format!("load {}", load.id);
        let side = bus_side(side_of, &el, "bus", load.bus)?;
        profile(&el, "p_demand", &load.p_demand, horizon)?;
        if let Some(t) = load.p_demand.iter().position(|&p| p < 0.0) {
            return Err(ModelError::invalid(el, format!("p_demand[{t}] is negative")));
        }
        if load.q_demand.is_empty() {
            load.q_demand = vec![0.0; horizon];
        }
        profile(&el, "q_demand", &load.q_demand, horizon)?;
        if side == Side::Dc && load.q_demand.iter().any(|&q| q != 0.0) {
            log::warn!("{el}: reactive demand on a DC bus set to zero");
            load.q_demand.iter_mut().for_each(|q| *q = 0.0);
        }
    }
    Ok(())
}

pub(super) fn check_evs(evs: &[Ev], side_of: &SideOf, horizon: usize) -> Result<(), ModelError> {
    unique_ids("ev", evs.iter().map(|e| e.id))?;
    for ev in evs {
        let el = format!("ev {}", ev.id);
        for (name, v) in [
            ("p_max", ev.p_max),
            ("e_min", ev.e_min),
            ("e_max", ev.e_max),
            ("e_initial", ev.e_initial),
            ("eta_ch", ev.eta_ch),
            ("eta_v2g", ev.eta_v2g),
        ] {
            finite(&el, name, v)?;
        }
        if bus_side(side_of, &el, "station_bus", ev.station_bus)? != Side::Dc {
            return Err(ModelError::invalid(el, "EV station must be DC-side"));
        }
        if ev.count == 0 {
            return Err(ModelError::invalid(el, "count must be at least 1"));
        }
        if ev.count >= super::EXPAND_STRIDE {
            return Err(ModelError::invalid(
                el,
                format!("count must be below {}", super::EXPAND_STRIDE),
            ));
        }
        if ev.p_max <= 0.0 {
            return Err(ModelError::invalid(el, "p_max must be positive"));
        }
        if !(ev.e_min <= ev.e_initial && ev.e_initial <= ev.e_max) {
            return Err(ModelError::invalid(
                el,
                "energy bounds must satisfy e_min <= e_initial <= e_max",
            ));
        }
        for (name, eta) in [("eta_ch", ev.eta_ch), ("eta_v2g", ev.eta_v2g)] {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(ModelError::invalid(el, format!("{name} must lie in (0, 1]")));
            }
        }
        profile(&el, "plug_profile", &ev.plug_profile, horizon)?;
        profile(&el, "travel_profile", &ev.travel_profile, horizon)?;
        for t in 0..horizon {
            let plug = ev.plug_profile[t];
            let travel = ev.travel_profile[t];
            if plug != 0.0 && plug != 1.0 {
                return Err(ModelError::invalid(
                    el,
                    format!("plug_profile[{t}] must be 0 or 1"),
                ));
            }
            if !(0.0..=1.0).contains(&travel) {
                return Err(ModelError::invalid(
                    el,
                    format!("travel_profile[{t}] must lie in [0, 1]"),
                ));
            }
            if plug > 0.0 && travel > 0.0 {
                return Err(ModelError::invalid(
                    el,
                    format!("hour {t}: an EV cannot be plugged in and traveling"),
                ));
            }
        }
    }
    Ok(())
}

/// Every bus must be reachable from every other through lines and inverters.
pub(super) fn check_connectivity(
    buses: &[Bus],
    index: &HashMap<u32, usize>,
    lines: &[Line],
    inverters: &[Inverter],
) -> Result<(), ModelError> {
    let n = buses.len();
    let mut adj = vec![Vec::new(); n];
    let edges = lines
        .iter()
        .map(|l| (l.from_bus, l.to_bus))
        .chain(inverters.iter().map(|c| (c.ac_bus, c.dc_bus)));
    for (a, b) in edges {
        let (a, b) = (index[&a], index[&b]);
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for &j in &adj[i] {
            if !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    match seen.iter().position(|s| !s) {
        Some(i) => Err(ModelError::invalid(
            format!("bus {}", buses[i].id),
            "not connected to the rest of the network",
        )),
        None => Ok(()),
    }
}
