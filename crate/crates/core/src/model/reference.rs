//! Synthetic 11-bus reference system.
//!
//! The topology has six AC buses (1-6) in a ring with one chord and five DC
//! buses (7-11) in a ring, coupled by two inverters (2-7 and 5-10). Each side
//! carries two PV units and one wind turbine. Twelve EV groups of 40 vehicles
//! sit at three DC charging stations (buses 8, 9 and 11).
//!
//! Profiles are invented but shaped so that renewables fall short of demand in
//! hours 4-7 and 19-23 and exceed it in hours 8-18. Wind is calm in daylight and
//! never exceeds its own side's load, matching load exactly in hours 0-3.
//! Impedances, profiles and vehicle parameters are NOT measured data.

use super::types::*;
use super::{ModelDocument, ModelError, NetworkModel};

/// Total demand, MW, hours 0..24.
const DEMAND: [f64; 24] = [
    3.0, 2.8, 2.7, 2.7, 3.0, 3.5, 4.0, 4.5, 4.8, 5.0, 5.2, 5.4, 5.5, 5.5, 5.4, 5.3, 5.2, 5.3, 5.6,
    6.0, 5.8, 5.2, 4.5, 3.6,
];

/// Total wind availability, MW.
const WIND: [f64; 24] = [
    3.0, 2.8, 2.7, 2.7, 2.4, 2.2, 2.0, 1.6, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
    2.6, 2.8, 2.8, 2.8, 3.0,
];

/// Total PV availability at full irradiance, MW.
const SOLAR: [f64; 24] = [
    0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.33, 1.32, 6.6, 8.8, 10.45, 11.55, 12.1, 12.1, 11.55, 10.45,
    8.8, 7.48, 6.6, 0.88, 0.0, 0.0, 0.0, 0.0,
];

const AC_LOAD_SHARE: f64 = 0.7;
const LOAD_POWER_FACTOR_Q: f64 = 0.3;
const EV_GROUPS: u32 = 12;
const EVS_PER_GROUP: u32 = 40;
pub const STATION_BUSES: [u32; 3] = [8, 9, 11];

fn scaled(profile: &[f64; 24], share: f64) -> Vec<f64> {
    profile.iter().map(|v| v * share).collect()
}

fn bus(id: u32, side: Side) -> Bus {
    Bus {
        id,
        side,
        v_min: 0.95,
        v_max: 1.05,
    }
}

fn ac_line(id: u32, from_bus: u32, to_bus: u32) -> Line {
    Line {
        id,
        from_bus,
        to_bus,
        side: Side::Ac,
        g: -4.0,
        b: 20.0,
        r: 0.0,
        s_min: -6.0,
        s_max: 6.0,
    }
}

fn dc_line(id: u32, from_bus: u32, to_bus: u32) -> Line {
    Line {
        id,
        from_bus,
        to_bus,
        side: Side::Dc,
        g: 0.0,
        b: 0.0,
        r: 0.01,
        s_min: -8.0,
        s_max: 8.0,
    }
}

fn ev_group(g: u32) -> Ev {
    // Morning trip at hour 6, 7 or 8; evening trip at 16, 17 or 18.
    let morning = 6 + (g % 3) as usize;
    let evening = 16 + ((g / 3) % 3) as usize;
    let mut plug = vec![1.0; 24];
    let mut travel = vec![0.0; 24];
    for t in [morning, evening] {
        plug[t] = 0.0;
        travel[t] = 0.1;
    }
    // Every other group stays parked away from a charger for an hour after each trip.
    if g % 2 == 1 {
        plug[morning + 1] = 0.0;
        plug[evening + 1] = 0.0;
    }
    Ev {
        id: g + 1,
        station_bus: STATION_BUSES[(g / 4) as usize],
        p_max: Ev::DEFAULT_P_MAX_KW,
        e_min: 16.0,
        e_max: 100.0,
        e_initial: 55.0,
        eta_ch: 0.95,
        eta_v2g: 0.95,
        plug_profile: plug,
        travel_profile: travel,
        count: EVS_PER_GROUP,
    }
}

pub fn document() -> ModelDocument {
    let mut buses: Vec<Bus> = (1..=6).map(|i| bus(i, Side::Ac)).collect();
    buses.extend((7..=11).map(|i| bus(i, Side::Dc)));

    let lines = vec![
        ac_line(1, 1, 2),
        ac_line(2, 2, 3),
        ac_line(3, 3, 4),
        ac_line(4, 4, 5),
        ac_line(5, 5, 6),
        ac_line(6, 6, 1),
        ac_line(7, 1, 4),
        dc_line(8, 7, 8),
        dc_line(9, 8, 9),
        dc_line(10, 9, 10),
        dc_line(11, 10, 11),
        dc_line(12, 11, 7),
    ];

    let inverter = |id, ac_bus, dc_bus| Inverter {
        id,
        ac_bus,
        dc_bus,
        p_min: -2.5,
        p_max: 2.5,
        q_min: -1.5,
        q_max: 1.5,
    };
    let inverters = vec![inverter(1, 2, 7), inverter(2, 5, 10)];

    let ac_wind = AC_LOAD_SHARE;
    let dc_wind = 1.0 - AC_LOAD_SHARE;
    let unit = |id, kind, bus, forecast| RenewableUnit {
        id,
        kind,
        bus,
        forecast,
    };
    let renewables = vec![
        unit(1, RenewableKind::Pv, 3, scaled(&SOLAR, 0.25)),
        unit(2, RenewableKind::Pv, 6, scaled(&SOLAR, 0.25)),
        unit(3, RenewableKind::Wt, 4, scaled(&WIND, ac_wind)),
        unit(4, RenewableKind::Pv, 8, scaled(&SOLAR, 0.25)),
        unit(5, RenewableKind::Pv, 10, scaled(&SOLAR, 0.25)),
        unit(6, RenewableKind::Wt, 11, scaled(&WIND, dc_wind)),
    ];

    let ac_loads = [(1u32, 1u32, 0.30), (2, 3, 0.25), (3, 5, 0.25), (4, 6, 0.20)];
    let dc_loads = [(5u32, 7u32, 0.6), (6, 9, 0.4)];
    let mut loads = Vec::new();
    for (id, bus, w) in ac_loads {
        let p = scaled(&DEMAND, AC_LOAD_SHARE * w);
        let q = p.iter().map(|v| v * LOAD_POWER_FACTOR_Q).collect();
        loads.push(LoadPoint {
            id,
            bus,
            p_demand: p,
            q_demand: q,
        });
    }
    for (id, bus, w) in dc_loads {
        loads.push(LoadPoint {
            id,
            bus,
            p_demand: scaled(&DEMAND, (1.0 - AC_LOAD_SHARE) * w),
            q_demand: vec![0.0; 24],
        });
    }

    let evs = (0..EV_GROUPS).map(ev_group).collect();

    ModelDocument {
        buses,
        lines,
        inverters,
        renewables,
        loads,
        evs,
        config: ScenarioConfig::default(),
    }
}

pub fn model() -> Result<(NetworkModel, ScenarioConfig), ModelError> {
    NetworkModel::from_document(document())
}
