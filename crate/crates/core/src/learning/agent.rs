use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::rng::SimRng;

use super::{rsl_update, sample_action, Action, ActionSpace, AgentState, LearningSchedule, UtilityTransform};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AgentKind {
    /// Risk-sensitive learner.
    Rsl,
    /// Classical mean-utility learner.
    Csl,
    /// Beamwidth-only learner at maximum power.
    Bl1,
}

impl AgentKind {
    pub const ALL: [AgentKind; 3] = [AgentKind::Rsl, AgentKind::Csl, AgentKind::Bl1];

    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Rsl => "rsl",
            AgentKind::Csl => "csl",
            AgentKind::Bl1 => "bl1",
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AgentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rsl" => Ok(AgentKind::Rsl),
            "csl" => Ok(AgentKind::Csl),
            "bl1" => Ok(AgentKind::Bl1),
            other => Err(Error::Parse {
                context: "agent kind".into(),
                message: format!("unknown agent {other:?}; expected rsl, csl or bl1"),
            }),
        }
    }
}

/// Hyperparameters shared by all learner kinds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AgentParams {
    pub risk_mu: f64,
    pub temperature: f64,
    pub schedule: LearningSchedule,
}

impl Default for AgentParams {
    fn default() -> Self {
        Self {
            risk_mu: -2.0,
            temperature: 5.0,
            schedule: LearningSchedule::default(),
        }
    }
}

/// One SC's learner. It owns its strategy, its estimates and its random stream.
#[derive(Clone, Debug)]
pub struct Agent {
    kind: AgentKind,
    space: ActionSpace,
    state: AgentState,
    schedule: LearningSchedule,
    transform: UtilityTransform,
    rng: SimRng,
}

impl Agent {
    pub fn new(kind: AgentKind, params: &AgentParams, full_space: &ActionSpace, rng: SimRng) -> Result<Self> {
        let (space, transform) = match kind {
            AgentKind::Rsl => (full_space.clone(), UtilityTransform::risk(params.risk_mu)?),
            AgentKind::Csl => (full_space.clone(), UtilityTransform::Mean),
            AgentKind::Bl1 => (full_space.max_power_only(), UtilityTransform::Mean),
        };
        let schedule = LearningSchedule::new(params.schedule.zeta_exponent, params.schedule.iota_exponent)?;
        Ok(Self {
            kind,
            state: AgentState::new(space.len(), params.temperature)?,
            space,
            schedule,
            transform,
            rng,
        })
    }

    pub fn kind(&self) -> AgentKind {
        self.kind
    }

    pub fn space(&self) -> &ActionSpace {
        &self.space
    }

    pub fn state(&self) -> &AgentState {
        &self.state
    }

    pub fn transform(&self) -> UtilityTransform {
        self.transform
    }

    /// Samples an action index from the previous-slot strategy.
    pub fn choose(&mut self) -> usize {
        sample_action(&self.state, &mut self.rng)
    }

    pub fn action(&self, m: usize) -> Action {
        self.space.actions()[m]
    }

    /// Feeds back the realized rate of `chosen`; returns the realized utility.
    pub fn learn(&mut self, chosen: usize, rate_norm: f64) -> Result<f64> {
        let u = self.transform.apply(rate_norm);
        rsl_update(&mut self.state, chosen, u, &self.schedule)?;
        Ok(u)
    }
}

/// Action of a BL1 learner this slot: maximum power, sampled beamwidth.
pub fn bl1_policy(agent: &mut Agent) -> Action {
    debug_assert_eq!(agent.kind(), AgentKind::Bl1);
    let m = agent.choose();
    agent.action(m)
}
