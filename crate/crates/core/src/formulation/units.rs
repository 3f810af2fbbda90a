//! Conversions from the config's money units to dollars per p.u. quantity.
//!
//! Time steps are one hour, so a p.u. of power held for a step is a p.u.·h
//! of energy.

use crate::model::ScenarioConfig;

/// `k_lost` ($/MWh) times the kW base, per p.u.·h of unserved demand.
pub fn lost_load_cost_per_pu(config: &ScenarioConfig) -> f64 {
    config.k_lost * config.base_mva / 1000.0
}

/// `beta1` ($/kWh) per p.u.·h of discharged group energy.
pub fn v2g_linear_cost_per_pu(config: &ScenarioConfig) -> f64 {
    config.beta1 * config.base_mva
}

/// Quadratic-diagonal entry for a group of `count` vehicles sharing the
/// discharge equally: `Σ β₂ (P/N)² = β₂ P² / N` with `P = base·x`.
pub fn v2g_quadratic_cost_per_pu(config: &ScenarioConfig, count: u32) -> f64 {
    2.0 * config.beta2 * config.base_mva * config.base_mva / count as f64
}
