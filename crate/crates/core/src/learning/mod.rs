//! Decentralized learners.
//!
//! Every SC keeps a mixed strategy over a fixed grid of (beamwidth, power)
//! actions and a vector of per-action utility estimates. Each slot it samples
//! an action from its previous strategy, observes only its own rate, and runs
//! two coupled stochastic-approximation updates: a fast one that moves the
//! estimate of the played action towards the realized utility, and a slower
//! one that moves the whole strategy towards the Boltzmann-Gibbs (logit)
//! response to the estimates.
//!
//! The three learner kinds share this machinery and differ only in the
//! utility fed to it and the actions they may play:
//!
//! | kind | utility of a rate `r` | actions |
//! |------|-----------------------|---------|
//! | RSL  | `(exp(mu r) - 1) / mu`, `mu < 0` | full grid |
//! | CSL  | `r` | full grid |
//! | BL1  | `r` | beamwidths at maximum power |

mod agent;
mod space;

pub use agent::{bl1_policy, Agent, AgentKind, AgentParams};
pub use space::{beamwidth_grid, Action, ActionSpace};

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::SimRng;

/// Step-size exponents: `zeta(t) = (t+1)^-a` for estimates, `iota(t) = (t+1)^-b` for strategies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LearningSchedule {
    pub zeta_exponent: f64,
    pub iota_exponent: f64,
}

impl Default for LearningSchedule {
    fn default() -> Self {
        Self {
            zeta_exponent: 0.55,
            iota_exponent: 0.6,
        }
    }
}

impl LearningSchedule {
    /// Requires `0.5 < a < b <= 1`: both rates sum to infinity, their squares
    /// converge, and the strategy rate vanishes relative to the estimate rate.
    pub fn new(zeta_exponent: f64, iota_exponent: f64) -> Result<Self> {
        if !(zeta_exponent > 0.5 && zeta_exponent < iota_exponent && iota_exponent <= 1.0) {
            return Err(Error::param(
                "learning schedule",
                format!("need 0.5 < zeta_exponent ({zeta_exponent}) < iota_exponent ({iota_exponent}) <= 1"),
            ));
        }
        Ok(Self {
            zeta_exponent,
            iota_exponent,
        })
    }

    pub fn zeta(&self, t: u64) -> f64 {
        (t as f64 + 1.0).powf(-self.zeta_exponent)
    }

    pub fn iota(&self, t: u64) -> f64 {
        (t as f64 + 1.0).powf(-self.iota_exponent)
    }
}

/// How a learner turns a rate into a utility.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum UtilityTransform {
    /// Exponential risk-sensitive utility with `mu < 0`.
    Risk { mu: f64 },
    /// Plain mean-rate utility.
    Mean,
}

impl UtilityTransform {
    pub fn risk(mu: f64) -> Result<Self> {
        check_mu(mu)?;
        Ok(Self::Risk { mu })
    }

    pub fn apply(&self, rate_norm: f64) -> f64 {
        match *self {
            Self::Risk { mu } => risk_utility_unchecked(rate_norm, mu),
            Self::Mean => csl_utility(rate_norm),
        }
    }
}

fn check_mu(mu: f64) -> Result<()> {
    if mu < 0.0 && mu.is_finite() {
        Ok(())
    } else {
        Err(Error::param("risk_mu", format!("{mu} must be negative; use the mean utility for 0")))
    }
}

fn risk_utility_unchecked(rate_norm: f64, mu: f64) -> f64 {
    (mu * rate_norm).exp_m1() / mu
}

/// Per-slot risk-sensitive utility `(exp(mu r) - 1) / mu`.
pub fn risk_utility(rate_norm: f64, mu: f64) -> Result<f64> {
    check_mu(mu)?;
    Ok(risk_utility_unchecked(rate_norm, mu))
}

/// Mean-only utility of the classical learner.
pub fn csl_utility(rate_norm: f64) -> f64 {
    rate_norm
}

/// Certainty equivalent `(1/mu) log(sum_m pi_m exp(mu r_m))` of a mixed strategy.
pub fn mixed_utility(strategy: &[f64], rates: &[f64], mu: f64) -> Result<f64> {
    check_mu(mu)?;
    check_pmf(strategy)?;
    if strategy.len() != rates.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} probabilities for {} rates",
            strategy.len(),
            rates.len()
        )));
    }
    if rates.iter().any(|r| !r.is_finite()) {
        return Err(Error::param("rates", "must be finite"));
    }
    // log-sum-exp around the largest exponent
    let shift = rates
        .iter()
        .zip(strategy)
        .filter(|(_, p)| **p > 0.0)
        .map(|(r, _)| mu * r)
        .fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = strategy
        .iter()
        .zip(rates)
        .map(|(p, r)| p * (mu * r - shift).exp())
        .sum();
    Ok((shift + sum.ln()) / mu)
}

/// Logit response `beta_m ∝ exp(max(u_m, 0) / kappa)`.
pub fn gibbs_strategy(utility_estimates: &[f64], kappa: f64) -> Vec<f64> {
    let mut out = vec![0.0; utility_estimates.len()];
    gibbs_into(utility_estimates, kappa, &mut out);
    out
}

fn gibbs_into(utility_estimates: &[f64], kappa: f64, out: &mut [f64]) {
    let top = utility_estimates.iter().fold(0.0f64, |m, u| m.max(*u));
    let mut total = 0.0;
    for (o, u) in out.iter_mut().zip(utility_estimates) {
        *o = ((u.max(0.0) - top) / kappa).exp();
        total += *o;
    }
    for o in out.iter_mut() {
        *o /= total;
    }
}

/// Shannon entropy in nats.
pub fn entropy(strategy: &[f64]) -> f64 {
    -strategy
        .iter()
        .filter(|p| **p > 0.0)
        .map(|p| p * p.ln())
        .sum::<f64>()
}

fn check_pmf(p: &[f64]) -> Result<()> {
    if p.is_empty() || p.iter().any(|x| !(*x >= 0.0)) {
        return Err(Error::param("strategy", "probabilities must be non-negative"));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > 1e-9 {
        return Err(Error::param("strategy", format!("sums to {s}")));
    }
    Ok(())
}

/// Mixed strategy and utility estimates of one SC.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentState {
    strategy: Vec<f64>,
    utility_estimates: Vec<f64>,
    temperature: f64,
    slot: u64,
    scratch: Vec<f64>,
}

impl AgentState {
    /// Uniform strategy and zero estimates over `n_actions` actions.
    pub fn new(n_actions: usize, temperature: f64) -> Result<Self> {
        if n_actions == 0 {
            return Err(Error::param("n_actions", "empty action space"));
        }
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(Error::param("temperature", "must be positive"));
        }
        Ok(Self {
            strategy: vec![1.0 / n_actions as f64; n_actions],
            utility_estimates: vec![0.0; n_actions],
            temperature,
            slot: 0,
            scratch: vec![0.0; n_actions],
        })
    }

    pub fn strategy(&self) -> &[f64] {
        &self.strategy
    }

    pub fn utility_estimates(&self) -> &[f64] {
        &self.utility_estimates
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    /// Number of updates applied so far.
    pub fn slot(&self) -> u64 {
        self.slot
    }

    /// One update with explicit step sizes.
    pub fn update_with_steps(&mut self, chosen: usize, realized_utility: f64, zeta: f64, iota: f64) -> Result<()> {
        let n = self.strategy.len();
        if chosen >= n {
            return Err(Error::param("chosen", format!("action {chosen} of {n}")));
        }
        if !realized_utility.is_finite() {
            return Err(Error::param("realized_utility", "must be finite"));
        }
        let est = &mut self.utility_estimates[chosen];
        *est += zeta * (realized_utility - *est);

        gibbs_into(&self.utility_estimates, self.temperature, &mut self.scratch);
        let mut total = 0.0;
        for (p, b) in self.strategy.iter_mut().zip(&self.scratch) {
            *p += iota * (b - *p);
            *p = p.max(0.0);
            total += *p;
        }
        for p in &mut self.strategy {
            *p /= total;
        }
        self.slot += 1;
        Ok(())
    }
}

/// Fast estimate update followed by the slow strategy update, at step `t = slot + 1`.
pub fn rsl_update(state: &mut AgentState, chosen: usize, realized_utility: f64, schedule: &LearningSchedule) -> Result<()> {
    let t = state.slot + 1;
    state.update_with_steps(chosen, realized_utility, schedule.zeta(t), schedule.iota(t))
}

/// Inverse-CDF draw from the current strategy.
pub fn sample_action(state: &AgentState, rng: &mut SimRng) -> usize {
    sample_index(&state.strategy, rng)
}

pub(crate) fn sample_index(pmf: &[f64], rng: &mut SimRng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (m, p) in pmf.iter().enumerate() {
        acc += p;
        if u < acc {
            return m;
        }
    }
    // rounding left a sliver above the cumulative sum
    pmf.iter().rposition(|p| *p > 0.0).unwrap_or(pmf.len() - 1)
}
