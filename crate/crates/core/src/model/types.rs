use serde::{Deserialize, Serialize};

/// Which side of the inverters an element lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "AC")]
    Ac,
    #[serde(rename = "DC")]
    Dc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RenewableKind {
    #[serde(rename = "PV")]
    Pv,
    #[serde(rename = "WT")]
    Wt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bus {
    pub id: u32,
    pub side: Side,
    pub v_min: f64,
    pub v_max: f64,
}

/// A branch between two buses of the same side.
///
/// For AC lines `g` and `b` are the off-diagonal admittance-matrix entries
/// `G_jo`, `B_jo` (so a resistive line has `g < 0`). DC lines use only `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Line {
    pub id: u32,
    pub from_bus: u32,
    pub to_bus: u32,
    pub side: Side,
    #[serde(default)]
    pub g: f64,
    #[serde(default)]
    pub b: f64,
    #[serde(default)]
    pub r: f64,
    pub s_min: f64,
    pub s_max: f64,
}

/// Lossless AC/DC converter. Positive `p` moves power from the DC bus to the AC bus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inverter {
    pub id: u32,
    pub ac_bus: u32,
    pub dc_bus: u32,
    pub p_min: f64,
    pub p_max: f64,
    pub q_min: f64,
    pub q_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenewableUnit {
    pub id: u32,
    pub kind: RenewableKind,
    pub bus: u32,
    /// Available output per hour, p.u.
    pub forecast: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadPoint {
    pub id: u32,
    pub bus: u32,
    pub p_demand: Vec<f64>,
    /// Omitted (or empty) means zero in every hour.
    #[serde(default)]
    pub q_demand: Vec<f64>,
}

fn default_count() -> u32 {
    1
}

/// One EV, or `count` identical EVs sharing a station and profiles.
///
/// Power is in kW and energy in kWh, per vehicle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ev {
    pub id: u32,
    pub station_bus: u32,
    #[serde(default = "Ev::default_p_max")]
    pub p_max: f64,
    pub e_min: f64,
    pub e_max: f64,
    pub e_initial: f64,
    pub eta_ch: f64,
    pub eta_v2g: f64,
    pub plug_profile: Vec<f64>,
    pub travel_profile: Vec<f64>,
    #[serde(default = "default_count")]
    pub count: u32,
}

impl Ev {
    pub const DEFAULT_P_MAX_KW: f64 = 150.0;

    fn default_p_max() -> f64 {
        Self::DEFAULT_P_MAX_KW
    }

    /// Group charge/discharge limit in kW.
    pub fn group_p_max(&self) -> f64 {
        self.p_max * self.count as f64
    }

    pub fn group_e_min(&self) -> f64 {
        self.e_min * self.count as f64
    }

    pub fn group_e_max(&self) -> f64 {
        self.e_max * self.count as f64
    }

    pub fn group_e_initial(&self) -> f64 {
        self.e_initial * self.count as f64
    }

    pub fn is_plugged(&self, hour: usize) -> bool {
        self.plug_profile[hour] > 0.5
    }

    /// Energy (kWh) the whole group spends driving in `hour`.
    pub fn travel_energy(&self, hour: usize) -> f64 {
        self.travel_profile[hour] * self.group_p_max()
    }

    /// Energy that has to be bought at the plug to cover the day's trips.
    pub fn trip_charge_energy(&self) -> f64 {
        (0..self.travel_profile.len())
            .map(|t| self.travel_energy(t))
            .sum::<f64>()
            / self.eta_ch
    }
}

/// End-of-day requirement on every battery.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalEnergy {
    /// No constraint on the last hour.
    Free,
    /// `E[horizon] >= e_initial`.
    AtLeast,
    /// `E[horizon] == e_initial`, so the schedule repeats day to day.
    #[default]
    Cyclic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FleetMode {
    /// An EV entry with `count = N` is one decision unit with N-fold limits.
    #[default]
    Aggregate,
    /// Every vehicle becomes its own decision unit.
    Expand,
}

fn one() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

/// Economic parameters and sweep multipliers.
///
/// `k_lost` is $/MWh, `beta1` $/kWh and `beta2` $/kWh², all per vehicle.
/// `base_mva` is the power base in kW used for every per-unit quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "ScenarioConfig::default_horizon")]
    pub horizon: usize,
    pub k_lost: f64,
    pub beta1: f64,
    pub beta2: f64,
    #[serde(default = "ScenarioConfig::default_xi")]
    pub xi: f64,
    #[serde(default = "one")]
    pub deg_multiplier: f64,
    #[serde(default = "one")]
    pub irradiance_fraction: f64,
    #[serde(default = "one")]
    pub inverter_capacity_fraction: f64,
    pub base_mva: f64,
    #[serde(default)]
    pub terminal_energy: TerminalEnergy,
    #[serde(default)]
    pub fleet_mode: FleetMode,
    /// When false every load must be served in full (`p^d = p^D`).
    #[serde(default = "default_true")]
    pub allow_load_shedding: bool,
}

impl ScenarioConfig {
    pub const DEFAULT_XI: f64 = 0.5;

    fn default_horizon() -> usize {
        24
    }

    fn default_xi() -> f64 {
        Self::DEFAULT_XI
    }
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            horizon: 24,
            k_lost: 1000.0,
            beta1: 0.10,
            beta2: 0.001,
            xi: Self::DEFAULT_XI,
            deg_multiplier: 1.0,
            irradiance_fraction: 1.0,
            inverter_capacity_fraction: 1.0,
            base_mva: 1000.0,
            terminal_energy: TerminalEnergy::default(),
            fleet_mode: FleetMode::default(),
            allow_load_shedding: true,
        }
    }
}

/// Elements attached to one bus, as indices into the model's element lists.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BusMembers {
    pub inverters: Vec<usize>,
    pub evs: Vec<usize>,
    pub loads: Vec<usize>,
    pub pv: Vec<usize>,
    pub wt: Vec<usize>,
    /// Lines whose `to_bus` is this bus.
    pub lines_to: Vec<usize>,
    /// Lines whose `from_bus` is this bus.
    pub lines_from: Vec<usize>,
}
