//! Scenario files: one JSON document per run.

use std::fs;
use std::path::Path;

use dtfl_core::fedsim::{MaliciousSpec, ScoringConfig, SimConfig, TaskConfig};
use dtfl_core::instances::Instance;
use dtfl_core::model::{validate_cluster, BldProfile, GldProfile, SystemParams};
use dtfl_core::optimizer::SolverConfig;
use dtfl_core::oracle::OracleMatchConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// A GLD as written in a scenario. `index` defaults to the list position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GldEntry {
    #[serde(default)]
    pub index: Option<u32>,
    pub data_bits: f64,
    pub gain_coord: f64,
    pub gain_eaves: f64,
    pub cpu_max: f64,
    pub tx_power_max: f64,
    pub jam_power_max: f64,
    pub energy_max: f64,
}

/// A BLD as written in a scenario. `noise` defaults to `sys.noise_coord`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BldEntry {
    #[serde(default)]
    pub index: Option<u32>,
    pub data_bits: f64,
    pub gain_coord: f64,
    pub gain_eaves: f64,
    pub tx_power: f64,
    #[serde(default)]
    pub noise: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    pub verify: bool,
    pub schedule: bool,
    pub unscheduled_window: f64,
    pub task: TaskConfig,
}

impl Default for SimSection {
    fn default() -> Self {
        let d = SimConfig::default();
        SimSection { verify: d.verify, schedule: d.schedule, unscheduled_window: d.unscheduled_window, task: d.task }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeSection {
    pub oracle: OracleMatchConfig,
    /// Convexity is probed on `[t_lb, convexity_factor · t_lb]`.
    pub convexity_factor: f64,
    pub pivot_trials: usize,
}

impl Default for ProbeSection {
    fn default() -> Self {
        ProbeSection { oracle: OracleMatchConfig::default(), convexity_factor: 4.0, pivot_trials: 1000 }
    }
}

fn one() -> usize {
    1
}

fn default_seed() -> u64 {
    SimConfig::default().seed
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub sys: SystemParams,
    pub glds: Vec<GldEntry>,
    pub blds: Vec<BldEntry>,
    #[serde(default = "one")]
    pub clusters: usize,
    #[serde(default)]
    pub rounds: u32,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub scoring: ScoringConfig,
    #[serde(default)]
    pub malicious: Option<MaliciousSpec>,
    #[serde(default)]
    pub sim: SimSection,
    #[serde(default)]
    pub probes: ProbeSection,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    /// Parses and validates.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let inst = self.instance();
        validate_cluster(&inst.sys, &inst.glds, &inst.blds).map_err(|e| CliError::Config(e.to_string()))?;
        self.solver.validate().map_err(|e| CliError::Config(e.to_string()))?;
        self.sim.task.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if self.clusters == 0 {
            return Err(CliError::Config("clusters must be at least 1".into()));
        }
        if self.probes.pivot_trials == 0 {
            return Err(CliError::Config("probes.pivot_trials must be at least 1".into()));
        }
        let factor = self.probes.convexity_factor;
        if factor.is_nan() || factor <= 1.0 {
            return Err(CliError::Config("probes.convexity_factor must exceed 1".into()));
        }
        Ok(())
    }

    pub fn instance(&self) -> Instance {
        let glds = self
            .glds
            .iter()
            .enumerate()
            .map(|(k, g)| GldProfile {
                index: g.index.unwrap_or(k as u32 + 1),
                data_bits: g.data_bits,
                gain_coord: g.gain_coord,
                gain_eaves: g.gain_eaves,
                cpu_max: g.cpu_max,
                tx_power_max: g.tx_power_max,
                jam_power_max: g.jam_power_max,
                energy_max: g.energy_max,
            })
            .collect();
        let blds = self
            .blds
            .iter()
            .enumerate()
            .map(|(k, b)| BldProfile {
                index: b.index.unwrap_or(k as u32 + 1),
                data_bits: b.data_bits,
                gain_coord: b.gain_coord,
                gain_eaves: b.gain_eaves,
                tx_power: b.tx_power,
                noise: b.noise.unwrap_or(self.sys.noise_coord),
            })
            .collect();
        Instance { sys: self.sys.clone(), glds, blds }
    }

    pub fn sim_config(&self, seed: u64, verify: bool) -> SimConfig {
        SimConfig {
            clusters: self.clusters,
            seed,
            verify,
            schedule: self.sim.schedule,
            unscheduled_window: self.sim.unscheduled_window,
            task: self.sim.task.clone(),
            scoring: self.scoring.clone(),
            malicious: self.malicious.clone(),
        }
    }

    /// A scenario holding exactly `inst` with defaults everywhere else.
    pub fn from_instance(inst: &Instance) -> Self {
        ScenarioConfig {
            sys: inst.sys.clone(),
            glds: inst
                .glds
                .iter()
                .map(|g| GldEntry {
                    index: Some(g.index),
                    data_bits: g.data_bits,
                    gain_coord: g.gain_coord,
                    gain_eaves: g.gain_eaves,
                    cpu_max: g.cpu_max,
                    tx_power_max: g.tx_power_max,
                    jam_power_max: g.jam_power_max,
                    energy_max: g.energy_max,
                })
                .collect(),
            blds: inst
                .blds
                .iter()
                .map(|b| BldEntry {
                    index: Some(b.index),
                    data_bits: b.data_bits,
                    gain_coord: b.gain_coord,
                    gain_eaves: b.gain_eaves,
                    tx_power: b.tx_power,
                    noise: Some(b.noise),
                })
                .collect(),
            clusters: 1,
            rounds: 0,
            seed: default_seed(),
            solver: SolverConfig::default(),
            scoring: ScoringConfig::default(),
            malicious: None,
            sim: SimSection::default(),
            probes: ProbeSection::default(),
        }
    }
}
