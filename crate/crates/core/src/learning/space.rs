use std::f64::consts::PI;

use crate::channel::dbm_to_watts;
use crate::error::{Error, Result};

/// One transmit configuration: beamwidth and power.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Action {
    pub beamwidth_rad: f64,
    pub power_w: f64,
}

impl Action {
    pub fn new(beamwidth_rad: f64, power_w: f64) -> Result<Self> {
        if !(beamwidth_rad > 0.0 && beamwidth_rad <= 2.0 * PI) {
            return Err(Error::param("beamwidth_rad", format!("{beamwidth_rad} is outside (0, 2pi]")));
        }
        if !(power_w >= 0.0 && power_w.is_finite()) {
            return Err(Error::param("power_w", format!("{power_w} must be finite and non-negative")));
        }
        Ok(Self {
            beamwidth_rad,
            power_w,
        })
    }
}

/// Ordered grid of actions, beamwidth-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ActionSpace {
    actions: Vec<Action>,
}

/// Evenly spaced beamwidths `min, min + step, ..., max`.
pub fn beamwidth_grid(min_rad: f64, max_rad: f64, step_rad: f64) -> Result<Vec<f64>> {
    if !(min_rad > 0.0 && max_rad >= min_rad && step_rad > 0.0) {
        return Err(Error::param(
            "beamwidth grid",
            format!("need 0 < min ({min_rad}) <= max ({max_rad}) and step ({step_rad}) > 0"),
        ));
    }
    let n = ((max_rad - min_rad) / step_rad + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| min_rad + i as f64 * step_rad).collect())
}

impl ActionSpace {
    /// Every `(beamwidth, power)` combination.
    pub fn grid(beamwidths_rad: &[f64], powers_w: &[f64]) -> Result<Self> {
        let mut actions = Vec::with_capacity(beamwidths_rad.len() * powers_w.len());
        for &theta in beamwidths_rad {
            for &p in powers_w {
                let a = Action::new(theta, p)?;
                if actions.contains(&a) {
                    return Err(Error::param("action grid", format!("duplicate action {a:?}")));
                }
                actions.push(a);
            }
        }
        if actions.is_empty() {
            return Err(Error::param("action grid", "no actions"));
        }
        Ok(Self { actions })
    }

    /// Beamwidths from a range and powers given in dBm.
    pub fn from_ranges(min_rad: f64, max_rad: f64, step_rad: f64, powers_dbm: &[f64]) -> Result<Self> {
        let powers: Vec<f64> = powers_dbm.iter().map(|d| dbm_to_watts(*d)).collect();
        Self::grid(&beamwidth_grid(min_rad, max_rad, step_rad)?, &powers)
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn get(&self, m: usize) -> Option<Action> {
        self.actions.get(m).copied()
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn max_power_w(&self) -> f64 {
        self.actions.iter().map(|a| a.power_w).fold(0.0, f64::max)
    }

    /// The subspace that keeps only the maximum power level.
    pub fn max_power_only(&self) -> Self {
        let p = self.max_power_w();
        Self {
            actions: self.actions.iter().copied().filter(|a| a.power_w == p).collect(),
        }
    }
}
