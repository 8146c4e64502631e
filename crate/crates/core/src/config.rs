//! Simulation configuration.
//!
//! The on-disk format is a flat TOML file: one `key = value` per constant,
//! no tables. Every key is optional and defaults to the reference setup
//! below; unknown keys are rejected.
//!
//! ```toml
//! densities_per_km2 = [16, 24]
//! n_topologies = 10
//! agents = ["rsl", "csl", "bl1"]
//! master_seed = 7
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{db_to_linear, ChannelParams, PropagationModel};
use crate::error::{Error, Result};
use crate::learning::{ActionSpace, AgentKind, AgentParams, LearningSchedule};
use crate::phy::{BeamPattern, LinkBudget};
use crate::topology::LayoutParams;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    // sweep
    pub densities_per_km2: Vec<u32>,
    pub area_side_m: f64,
    pub ue_min_radius_m: f64,
    pub ue_max_radius_m: f64,
    pub horizon_slots: usize,
    pub n_topologies: u32,
    pub agents: Vec<String>,
    pub master_seed: u64,
    pub out_dir: PathBuf,

    // channel
    pub carrier_ghz: f64,
    pub bandwidth_hz: f64,
    pub n_tx: usize,
    pub n_rx: usize,
    pub csi_error: f64,
    pub noise_figure_db: f64,
    pub markov_states: usize,
    pub coherence_slots: usize,
    pub los_decay_m: f64,
    pub los_intercept_db: f64,
    pub los_slope_db: f64,
    pub nlos_intercept_db: f64,
    pub nlos_slope_db: f64,
    pub los_shadow_std_db: f64,
    pub nlos_shadow_std_db: f64,
    pub shadowing: bool,

    // antennas
    pub sidelobe_gain: f64,
    pub rx_beamwidth_rad: f64,
    pub antenna_gain_dbi: f64,

    // actions
    pub beamwidth_min_rad: f64,
    pub beamwidth_max_rad: f64,
    pub beamwidth_step_rad: f64,
    pub power_levels_dbm: Vec<f64>,

    // learning
    pub risk_mu: f64,
    pub temperature: f64,
    pub zeta_exponent: f64,
    pub iota_exponent: f64,
    pub utility_rate_scale_bps: f64,

    // reports
    pub reliability_targets_gbps: Vec<f64>,
    pub availability_targets: Vec<f64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        let ch = ChannelParams::default();
        let prop = PropagationModel::default();
        let learn = AgentParams::default();
        Self {
            densities_per_km2: vec![16, 24, 32, 48, 64, 80, 96, 128],
            area_side_m: 500.0,
            ue_min_radius_m: 10.0,
            ue_max_radius_m: 100.0,
            horizon_slots: 4000,
            n_topologies: 50,
            agents: AgentKind::ALL.iter().map(|k| k.name().to_string()).collect(),
            master_seed: 2018,
            out_dir: PathBuf::from("results"),
            carrier_ghz: ch.carrier_ghz,
            bandwidth_hz: ch.bandwidth_hz,
            n_tx: ch.n_tx,
            n_rx: ch.n_rx,
            csi_error: ch.csi_error,
            noise_figure_db: ch.noise_figure_db,
            markov_states: ch.markov_states,
            coherence_slots: ch.coherence_slots,
            los_decay_m: prop.los_decay_m,
            los_intercept_db: prop.los_intercept_db,
            los_slope_db: prop.los_slope_db,
            nlos_intercept_db: prop.nlos_intercept_db,
            nlos_slope_db: prop.nlos_slope_db,
            los_shadow_std_db: prop.los_shadow_std_db,
            nlos_shadow_std_db: prop.nlos_shadow_std_db,
            shadowing: prop.shadowing,
            sidelobe_gain: 0.1,
            rx_beamwidth_rad: 0.7,
            antenna_gain_dbi: 5.0,
            beamwidth_min_rad: 0.2,
            beamwidth_max_rad: 0.4,
            beamwidth_step_rad: 0.02,
            power_levels_dbm: vec![21.0, 23.0, 25.0],
            risk_mu: learn.risk_mu,
            temperature: learn.temperature,
            zeta_exponent: learn.schedule.zeta_exponent,
            iota_exponent: learn.schedule.iota_exponent,
            utility_rate_scale_bps: 1e9,
            reliability_targets_gbps: vec![2.0, 3.0, 4.0],
            availability_targets: vec![0.8, 0.9],
        }
    }
}

impl SimConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse {
            context: "config".into(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("flat config always serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon_slots < 1 {
            return Err(Error::param("horizon_slots", "must be at least 1"));
        }
        if self.n_topologies < 1 {
            return Err(Error::param("n_topologies", "must be at least 1"));
        }
        if self.densities_per_km2.is_empty() {
            return Err(Error::param("densities_per_km2", "must not be empty"));
        }
        for &d in &self.densities_per_km2 {
            self.layout_params(d).sc_count_checked()?;
        }
        self.agent_kinds()?;
        self.channel_params().validate()?;
        self.link_budget()?.validate()?;
        self.action_space()?;
        self.agent_params()?;
        for &p in &self.availability_targets {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::param("availability_targets", format!("{p} is outside (0, 1)")));
            }
        }
        Ok(())
    }

    pub fn agent_kinds(&self) -> Result<Vec<AgentKind>> {
        if self.agents.is_empty() {
            return Err(Error::param("agents", "must not be empty"));
        }
        self.agents.iter().map(|a| a.parse()).collect()
    }

    pub fn layout_params(&self, density_per_km2: u32) -> LayoutParams {
        LayoutParams {
            density_per_km2: f64::from(density_per_km2),
            area_side_m: self.area_side_m,
            ue_min_radius_m: self.ue_min_radius_m,
            ue_max_radius_m: self.ue_max_radius_m,
        }
    }

    pub fn channel_params(&self) -> ChannelParams {
        ChannelParams {
            carrier_ghz: self.carrier_ghz,
            bandwidth_hz: self.bandwidth_hz,
            n_tx: self.n_tx,
            n_rx: self.n_rx,
            csi_error: self.csi_error,
            noise_figure_db: self.noise_figure_db,
            markov_states: self.markov_states,
            coherence_slots: self.coherence_slots,
        }
    }

    pub fn propagation(&self) -> PropagationModel {
        PropagationModel {
            los_decay_m: self.los_decay_m,
            los_intercept_db: self.los_intercept_db,
            los_slope_db: self.los_slope_db,
            nlos_intercept_db: self.nlos_intercept_db,
            nlos_slope_db: self.nlos_slope_db,
            los_shadow_std_db: self.los_shadow_std_db,
            nlos_shadow_std_db: self.nlos_shadow_std_db,
            shadowing: self.shadowing,
        }
    }

    pub fn link_budget(&self) -> Result<LinkBudget> {
        Ok(LinkBudget {
            tx_sidelobe_gain: self.sidelobe_gain,
            rx_pattern: BeamPattern::new(self.rx_beamwidth_rad, self.sidelobe_gain)?,
            antenna_gain: db_to_linear(self.antenna_gain_dbi),
            bandwidth_hz: self.bandwidth_hz,
            rate_unit_bps: self.utility_rate_scale_bps,
        })
    }

    pub fn action_space(&self) -> Result<ActionSpace> {
        ActionSpace::from_ranges(
            self.beamwidth_min_rad,
            self.beamwidth_max_rad,
            self.beamwidth_step_rad,
            &self.power_levels_dbm,
        )
    }

    pub fn agent_params(&self) -> Result<AgentParams> {
        if !(self.temperature > 0.0) {
            return Err(Error::param("temperature", "must be positive"));
        }
        if !(self.risk_mu < 0.0) {
            return Err(Error::param("risk_mu", "must be negative"));
        }
        Ok(AgentParams {
            risk_mu: self.risk_mu,
            temperature: self.temperature,
            schedule: LearningSchedule::new(self.zeta_exponent, self.iota_exponent)?,
        })
    }
}

impl LayoutParams {
    fn sc_count_checked(&self) -> Result<usize> {
        match self.sc_count() {
            0 => Err(Error::param(
                "densities_per_km2",
                format!("{} per km^2 yields no SCs in this area", self.density_per_km2),
            )),
            n => Ok(n),
        }
    }
}
