//! Blockage, large-scale attenuation, small-scale fading and imperfect CSI.
//!
//! A link's matrix channel is `sqrt(Nb*Nk) * sqrt(g) * W` where `g` is the
//! linear large-scale gain (path loss plus shadowing) and `W` has i.i.d.
//! `CN(0, 1/(Nb*Nk))` entries. The transmitter only sees the estimate
//! `sqrt(Nb*Nk) * sqrt(g) * (sqrt(1 - tau^2) W + tau W_hat)` with an independent
//! error matrix `W_hat` of the same law.

use nalgebra::{Complex, DMatrix};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::SimRng;

pub type CMatrix = DMatrix<Complex<f64>>;

const BOLTZMANN_J_PER_K: f64 = 1.380_649e-23;
const REFERENCE_TEMPERATURE_K: f64 = 290.0;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

/// Distance-dependent blockage and path loss, urban 28 GHz defaults.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagationModel {
    /// LOS probability is `exp(-d / los_decay_m)`.
    pub los_decay_m: f64,
    pub los_intercept_db: f64,
    /// dB per decade of distance.
    pub los_slope_db: f64,
    pub nlos_intercept_db: f64,
    pub nlos_slope_db: f64,
    pub los_shadow_std_db: f64,
    pub nlos_shadow_std_db: f64,
    pub shadowing: bool,
}

impl Default for PropagationModel {
    fn default() -> Self {
        Self {
            los_decay_m: 67.1,
            los_intercept_db: 61.4,
            los_slope_db: 20.0,
            nlos_intercept_db: 72.0,
            nlos_slope_db: 29.2,
            los_shadow_std_db: 5.8,
            nlos_shadow_std_db: 8.7,
            shadowing: true,
        }
    }
}

impl PropagationModel {
    pub fn without_shadowing(self) -> Self {
        Self {
            shadowing: false,
            ..self
        }
    }

    pub fn los_probability(&self, distance_m: f64) -> f64 {
        (-distance_m / self.los_decay_m).exp()
    }

    pub fn draw_blockage(&self, distance_m: f64, rng: &mut SimRng) -> bool {
        rng.random::<f64>() < self.los_probability(distance_m)
    }

    pub fn path_loss_db(&self, distance_m: f64, los: bool) -> f64 {
        let (a, b) = if los {
            (self.los_intercept_db, self.los_slope_db)
        } else {
            (self.nlos_intercept_db, self.nlos_slope_db)
        };
        a + b * distance_m.log10()
    }

    /// Large-scale gain in dB: minus path loss minus a lognormal shadowing draw.
    pub fn large_scale_gain(&self, distance_m: f64, los: bool, rng: &mut SimRng) -> f64 {
        let shadow = if self.shadowing {
            let std = if los {
                self.los_shadow_std_db
            } else {
                self.nlos_shadow_std_db
            };
            std * rng.sample::<f64, _>(StandardNormal)
        } else {
            0.0
        };
        -self.path_loss_db(distance_m, los) - shadow
    }

    /// Blockage state and large-scale gain of one link, drawn together.
    pub fn draw_large_scale(&self, distance_m: f64, rng: &mut SimRng) -> LargeScale {
        let los = self.draw_blockage(distance_m, rng);
        LargeScale {
            los,
            gain_db: self.large_scale_gain(distance_m, los, rng),
        }
    }
}

/// Static per-link state: blockage and large-scale gain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LargeScale {
    pub los: bool,
    pub gain_db: f64,
}

impl LargeScale {
    pub fn gain_linear(&self) -> f64 {
        db_to_linear(self.gain_db)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelParams {
    pub carrier_ghz: f64,
    pub bandwidth_hz: f64,
    /// SC antennas.
    pub n_tx: usize,
    /// UE antennas.
    pub n_rx: usize,
    /// Estimation-error mixing coefficient; 0 is perfect CSI.
    pub csi_error: f64,
    pub noise_figure_db: f64,
    pub markov_states: usize,
    /// Slots between fading redraws; 0 freezes the fading.
    pub coherence_slots: usize,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            carrier_ghz: 28.0,
            bandwidth_hz: 1e9,
            n_tx: 64,
            n_rx: 4,
            csi_error: 0.0,
            noise_figure_db: 9.0,
            markov_states: 2,
            coherence_slots: 1,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_rx < 1 {
            return Err(Error::param("n_rx", "need at least one UE antenna"));
        }
        if self.n_tx < self.n_rx {
            return Err(Error::param("n_tx", "SC must have at least as many antennas as the UE"));
        }
        if !(0.0..=1.0).contains(&self.csi_error) {
            return Err(Error::param("csi_error", "must lie in [0, 1]"));
        }
        if !(self.bandwidth_hz > 0.0) {
            return Err(Error::param("bandwidth_hz", "must be positive"));
        }
        if self.markov_states < 1 {
            return Err(Error::param("markov_states", "need at least one state"));
        }
        Ok(())
    }

    /// Thermal noise `k T0 W NF` in watts.
    pub fn noise_power_w(&self) -> f64 {
        BOLTZMANN_J_PER_K * REFERENCE_TEMPERATURE_K * self.bandwidth_hz * db_to_linear(self.noise_figure_db)
    }
}

/// Realized channel of one link.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkChannel {
    pub los: bool,
    pub large_scale_db: f64,
    /// `n_tx x n_rx`.
    pub true_channel: CMatrix,
    /// What the SC learned from uplink training.
    pub estimated_channel: CMatrix,
    pub noise_power_w: f64,
}

/// Matrix with i.i.d. circularly-symmetric complex Gaussian entries of the given variance.
pub fn complex_gaussian(rows: usize, cols: usize, variance: f64, rng: &mut SimRng) -> CMatrix {
    let s = (variance / 2.0).sqrt();
    CMatrix::from_fn(rows, cols, |_, _| {
        Complex::new(
            s * rng.sample::<f64, _>(StandardNormal),
            s * rng.sample::<f64, _>(StandardNormal),
        )
    })
}

pub fn draw_channel(params: &ChannelParams, large_scale: LargeScale, rng: &mut SimRng) -> LinkChannel {
    let (nb, nk) = (params.n_tx, params.n_rx);
    let entry_var = 1.0 / (nb * nk) as f64;
    let amplitude = ((nb * nk) as f64 * large_scale.gain_linear()).sqrt();
    let fading = complex_gaussian(nb, nk, entry_var, rng);
    let tau = params.csi_error;
    let estimated_channel = if tau == 0.0 {
        &fading * Complex::from(amplitude)
    } else {
        let error = complex_gaussian(nb, nk, entry_var, rng);
        (&fading * Complex::from((1.0 - tau * tau).sqrt()) + error * Complex::from(tau))
            * Complex::from(amplitude)
    };
    LinkChannel {
        los: large_scale.los,
        large_scale_db: large_scale.gain_db,
        true_channel: fading * Complex::from(amplitude),
        estimated_channel,
        noise_power_w: params.noise_power_w(),
    }
}

/// Draws `||h^H f||_F^2` for a fresh channel `h` of a link with linear gain
/// `gain_linear`, where `f` is independent of `h`.
///
/// Given the eigenvalues `lambda_j` of `f^H f`, the value is distributed as
/// `gain * sum_j lambda_j * G_j` with independent `G_j ~ Gamma(n_rx, 1)`, so
/// cross-links never need their full `n_tx x n_rx` matrix.
pub fn draw_projected_power(gain_linear: f64, gram_eigenvalues: &[f64], n_rx: usize, rng: &mut SimRng) -> f64 {
    let gamma = Gamma::new(n_rx as f64, 1.0).expect("n_rx >= 1");
    gain_linear
        * gram_eigenvalues
            .iter()
            .map(|&l| l.max(0.0) * gamma.sample(rng))
            .sum::<f64>()
}

/// Markov chain over channel states; the fading is redrawn on a fixed cadence.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelProcess {
    state: usize,
    transition: Vec<Vec<f64>>,
    coherence_slots: usize,
    since_redraw: usize,
}

impl ChannelProcess {
    pub fn new(transition: Vec<Vec<f64>>, initial_state: usize, coherence_slots: usize) -> Result<Self> {
        let n = transition.len();
        if n == 0 {
            return Err(Error::param("transition", "empty transition matrix"));
        }
        for (i, row) in transition.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch(format!("transition row {i} has {} entries, expected {n}", row.len())));
            }
            if row.iter().any(|p| !(*p >= 0.0)) {
                return Err(Error::param("transition", format!("row {i} has a negative entry")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::param("transition", format!("row {i} sums to {sum}")));
            }
        }
        if initial_state >= n {
            return Err(Error::param("initial_state", format!("{initial_state} >= {n}")));
        }
        Ok(Self {
            state: initial_state,
            transition,
            coherence_slots,
            since_redraw: 0,
        })
    }

    /// Uniform transitions among `states` states.
    pub fn uniform(states: usize, coherence_slots: usize) -> Result<Self> {
        if states == 0 {
            return Err(Error::param("markov_states", "need at least one state"));
        }
        let p = 1.0 / states as f64;
        let mut rows = vec![vec![p; states]; states];
        // absorb rounding so every row sums to one within 1e-12
        for row in &mut rows {
            let s: f64 = row[..states - 1].iter().sum();
            row[states - 1] = 1.0 - s;
        }
        Self::new(rows, 0, coherence_slots)
    }

    pub fn state(&self) -> usize {
        self.state
    }

    pub fn states(&self) -> usize {
        self.transition.len()
    }

    /// Advances one slot. Returns `true` when the fading must be redrawn.
    pub fn step(&mut self, rng: &mut SimRng) -> bool {
        if self.coherence_slots == 0 {
            return false;
        }
        self.since_redraw += 1;
        if self.since_redraw < self.coherence_slots {
            return false;
        }
        self.since_redraw = 0;
        let row = &self.transition[self.state];
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut next = row.len() - 1;
        for (j, p) in row.iter().enumerate() {
            acc += p;
            if u < acc {
                next = j;
                break;
            }
        }
        self.state = next;
        true
    }
}
