//! Analog beam gains, conjugate precoding and the per-slot achievable rate.

use std::f64::consts::PI;

use nalgebra::SymmetricEigen;

use crate::channel::CMatrix;
use crate::error::{Error, Result};
use crate::learning::Action;

/// Sectored pattern: flat main lobe of width `beamwidth_rad`, constant side lobe.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeamPattern {
    beamwidth_rad: f64,
    sidelobe_gain: f64,
}

/// Largest side-lobe gain for which tuning only the transmit beamwidth is sufficient.
pub const MAX_SIDELOBE_GAIN: f64 = 1.0 / 3.0;

impl BeamPattern {
    pub fn new(beamwidth_rad: f64, sidelobe_gain: f64) -> Result<Self> {
        check_beamwidth(beamwidth_rad)?;
        check_sidelobe(sidelobe_gain)?;
        Ok(Self {
            beamwidth_rad,
            sidelobe_gain,
        })
    }

    pub fn beamwidth_rad(&self) -> f64 {
        self.beamwidth_rad
    }

    pub fn sidelobe_gain(&self) -> f64 {
        self.sidelobe_gain
    }

    pub fn main_lobe_gain(&self) -> f64 {
        main_lobe_gain(self.beamwidth_rad, self.sidelobe_gain)
    }

    pub fn gain(&self, deviation_rad: f64) -> f64 {
        beam_gain(deviation_rad, self.beamwidth_rad, self.sidelobe_gain)
    }
}

fn check_beamwidth(theta: f64) -> Result<()> {
    if theta > 0.0 && theta <= 2.0 * PI {
        Ok(())
    } else {
        Err(Error::param("beamwidth_rad", format!("{theta} is outside (0, 2pi]")))
    }
}

fn check_sidelobe(eta: f64) -> Result<()> {
    if eta > 0.0 && eta <= MAX_SIDELOBE_GAIN {
        Ok(())
    } else {
        Err(Error::param("sidelobe_gain", format!("{eta} is outside (0, 1/3]")))
    }
}

/// Main-lobe gain `(2pi - (2pi - theta) eta) / theta`. The radiated power
/// integrates to `2pi` over the circle for every beamwidth.
pub fn main_lobe_gain(beamwidth_rad: f64, sidelobe_gain: f64) -> f64 {
    let full = 2.0 * PI;
    (full - (full - beamwidth_rad) * sidelobe_gain) / beamwidth_rad
}

pub fn beam_gain(deviation_rad: f64, beamwidth_rad: f64, sidelobe_gain: f64) -> f64 {
    if deviation_rad.abs() <= beamwidth_rad / 2.0 {
        main_lobe_gain(beamwidth_rad, sidelobe_gain)
    } else {
        sidelobe_gain
    }
}

/// Unit-power conjugate precoder `f = h_hat / ||h_hat||_F`.
#[derive(Clone, Debug)]
pub struct Precoder {
    filter: CMatrix,
    gram_eigenvalues: Vec<f64>,
}

impl Precoder {
    pub fn conjugate(estimated: &CMatrix) -> Result<Self> {
        let norm = estimated.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::DegeneratePrecoder);
        }
        let filter = estimated.unscale(norm);
        let gram = filter.adjoint() * &filter;
        let gram_eigenvalues = SymmetricEigen::new(gram).eigenvalues.iter().copied().collect();
        Ok(Self {
            filter,
            gram_eigenvalues,
        })
    }

    pub fn filter(&self) -> &CMatrix {
        &self.filter
    }

    /// Eigenvalues of `f^H f`; they sum to one.
    pub fn gram_eigenvalues(&self) -> &[f64] {
        &self.gram_eigenvalues
    }

    /// `||h^H f||_F^2`, the receive-combined power of channel `h` through this filter.
    pub fn power_through(&self, channel: &CMatrix) -> Result<f64> {
        if channel.shape() != self.filter.shape() {
            return Err(Error::DimensionMismatch(format!(
                "channel {:?} vs precoder {:?}",
                channel.shape(),
                self.filter.shape()
            )));
        }
        Ok(channel.ad_mul(&self.filter).norm_squared())
    }
}

/// Effective channel power `||h^H f||_F^2` under conjugate precoding on `estimated`.
pub fn precoded_power(true_channel: &CMatrix, estimated_channel: &CMatrix) -> Result<f64> {
    Precoder::conjugate(estimated_channel)?.power_through(true_channel)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateSample {
    pub sinr_linear: f64,
    pub rate_bps: f64,
    /// Rate in the unit the learners see (Gbps by default).
    pub rate_norm: f64,
}

/// Gains and constants shared by every link of the network.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkBudget {
    /// Transmit side-lobe gain; the main lobe follows from each action's beamwidth.
    pub tx_sidelobe_gain: f64,
    /// Fixed UE receive pattern.
    pub rx_pattern: BeamPattern,
    /// SC element gain applied to every transmitted power, linear.
    pub antenna_gain: f64,
    pub bandwidth_hz: f64,
    /// Divisor turning bits/s into the learners' rate unit.
    pub rate_unit_bps: f64,
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        check_sidelobe(self.tx_sidelobe_gain)?;
        if !(self.antenna_gain > 0.0) {
            return Err(Error::param("antenna_gain", "must be positive"));
        }
        if !(self.bandwidth_hz > 0.0) {
            return Err(Error::param("bandwidth_hz", "must be positive"));
        }
        if !(self.rate_unit_bps > 0.0) {
            return Err(Error::param("utility_rate_scale_bps", "must be positive"));
        }
        Ok(())
    }

    fn tx_gain(&self, deviation_rad: f64, action: &Action) -> f64 {
        beam_gain(deviation_rad, action.beamwidth_rad, self.tx_sidelobe_gain)
    }

    pub fn sample(&self, sinr_linear: f64) -> RateSample {
        let rate_bps = self.bandwidth_hz * sinr_linear.ln_1p() / std::f64::consts::LN_2;
        RateSample {
            sinr_linear,
            rate_bps,
            rate_norm: rate_bps / self.rate_unit_bps,
        }
    }
}

/// Serving-link input to [`compute_rate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ServingLink {
    pub sc: usize,
    /// `||h^H f||^2` through the SC's own precoder.
    pub channel_power: f64,
    pub noise_power_w: f64,
}

/// One interfering SC as seen by the victim UE.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterferingLink {
    pub sc: usize,
    /// `||h^H f||^2` of the cross channel through the interferer's own precoder.
    pub channel_power: f64,
    pub tx_deviation_rad: f64,
    pub rx_deviation_rad: f64,
}

/// SINR and rate of the UE on `serving` when every SC plays `actions[sc]`.
pub fn compute_rate(
    serving: &ServingLink,
    interferers: &[InterferingLink],
    actions: &[Action],
    budget: &LinkBudget,
) -> Result<RateSample> {
    let action_of = |sc: usize| {
        actions.get(sc).ok_or_else(|| {
            Error::DimensionMismatch(format!("no action for SC {sc} among {}", actions.len()))
        })
    };
    let own = action_of(serving.sc)?;
    let rx_main = budget.rx_pattern.gain(0.0);
    let signal = own.power_w * budget.antenna_gain * budget.tx_gain(0.0, own) * rx_main * serving.channel_power;
    let mut interference = 0.0;
    for link in interferers {
        let a = action_of(link.sc)?;
        interference += a.power_w
            * budget.antenna_gain
            * budget.tx_gain(link.tx_deviation_rad, a)
            * budget.rx_pattern.gain(link.rx_deviation_rad)
            * link.channel_power;
    }
    let denom = interference + serving.noise_power_w;
    let sinr = if signal == 0.0 { 0.0 } else { signal / denom };
    Ok(budget.sample(sinr))
}
