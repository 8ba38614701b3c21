use std::path::PathBuf;

use hems_agent::AgentConfig;
use hems_core::{HemsModel, TariffSpec};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub agent: AgentConfig,
    pub model: HemsModel,
    pub tariff: TariffSpec,
    /// Step length of the synthetic scenario, hours.
    pub dt_hours: f64,
    pub scenario_seed: u64,
    /// Sessions idle longer than this are dropped.
    pub ttl_secs: u64,
    /// When set, every session view is also written here as `<id>.json`.
    pub snapshot_dir: Option<PathBuf>,
    pub tolerance: f64,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            agent: AgentConfig::default(),
            model: HemsModel::default(),
            tariff: TariffSpec::default(),
            dt_hours: 0.5,
            scenario_seed: 0,
            ttl_secs: 3600,
            snapshot_dir: None,
            tolerance: hems_core::DEFAULT_TOLERANCE,
        }
    }
}

impl ServiceConfig {
    pub fn validate(&self) -> Result<(), String> {
        self.agent.validate().map_err(|e| e.to_string())?;
        self.model.validate().map_err(|e| e.to_string())?;
        self.tariff.validate().map_err(|e| e.to_string())?;
        if !(self.dt_hours > 0.0 && (24.0 / self.dt_hours).fract() == 0.0) {
            return Err(format!("dt_hours {} must divide a day", self.dt_hours));
        }
        if self.ttl_secs == 0 {
            return Err("ttl_secs must be positive".into());
        }
        Ok(())
    }
}
