//! Slot loop, episodes and Monte-Carlo sweeps.
//!
//! Within a slot every agent samples from its previous strategy, the network
//! turns the joint action into one rate per UE, and each agent learns from its
//! own rate only. The fading then moves on. Episodes are independent and are
//! the unit of parallelism; slots inside an episode are sequential.

use std::path::Path;

use rayon::prelude::*;

use crate::channel::{
    draw_channel, draw_projected_power, ChannelParams, ChannelProcess, LargeScale, LinkChannel, PropagationModel,
};
use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::learning::{entropy, Action, Agent, AgentKind};
use crate::phy::{compute_rate, InterferingLink, LinkBudget, Precoder, RateSample, ServingLink};
use crate::rng::{CellSeeds, SimRng, StreamRole};
use crate::topology::{compute_geometry, generate_layout, LinkGeometry, NetworkLayout};

/// Layout, static large-scale state and the current fading realization.
pub struct Network {
    layout: NetworkLayout,
    geometry: LinkGeometry,
    /// Row-major by SC: `large_scale[b * n + k]`.
    large_scale: Vec<LargeScale>,
    params: ChannelParams,
    budget: LinkBudget,
    process: ChannelProcess,
    fading_rng: SimRng,
    serving: Vec<LinkChannel>,
    serving_power: Vec<f64>,
    /// `||h_{bk}^H f_b||^2` for `b != k`, row-major by SC.
    cross_power: Vec<f64>,
    scratch: Vec<InterferingLink>,
}

impl Network {
    /// Draws blockage and shadowing for every link, then the first fading realization.
    pub fn new(
        layout: NetworkLayout,
        params: ChannelParams,
        propagation: &PropagationModel,
        budget: LinkBudget,
        large_scale_rng: &mut SimRng,
        fading_rng: SimRng,
    ) -> Result<Self> {
        let geometry = compute_geometry(&layout);
        let n = layout.len();
        let large_scale = (0..n * n)
            .map(|i| propagation.draw_large_scale(geometry.distance_m(i / n, i % n), large_scale_rng))
            .collect();
        Self::with_large_scale(layout, large_scale, params, budget, fading_rng)
    }

    /// Uses the given per-link large-scale state instead of drawing it.
    pub fn with_large_scale(
        layout: NetworkLayout,
        large_scale: Vec<LargeScale>,
        params: ChannelParams,
        budget: LinkBudget,
        fading_rng: SimRng,
    ) -> Result<Self> {
        params.validate()?;
        budget.validate()?;
        let n = layout.len();
        if large_scale.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "{} large-scale entries for {n} SCs",
                large_scale.len()
            )));
        }
        let process = ChannelProcess::uniform(params.markov_states, params.coherence_slots)?;
        let mut net = Self {
            geometry: compute_geometry(&layout),
            layout,
            large_scale,
            params,
            budget,
            process,
            fading_rng,
            serving: Vec::with_capacity(n),
            serving_power: vec![0.0; n],
            cross_power: vec![0.0; n * n],
            scratch: Vec::with_capacity(n),
        };
        net.redraw()?;
        Ok(net)
    }

    pub fn len(&self) -> usize {
        self.layout.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layout.is_empty()
    }

    pub fn layout(&self) -> &NetworkLayout {
        &self.layout
    }

    pub fn geometry(&self) -> &LinkGeometry {
        &self.geometry
    }

    pub fn large_scale(&self, sc: usize, ue: usize) -> LargeScale {
        self.large_scale[sc * self.len() + ue]
    }

    pub fn serving_channel(&self, sc: usize) -> &LinkChannel {
        &self.serving[sc]
    }

    pub fn markov_state(&self) -> usize {
        self.process.state()
    }

    fn redraw(&mut self) -> Result<()> {
        let n = self.len();
        self.serving.clear();
        let mut precoders = Vec::with_capacity(n);
        for b in 0..n {
            let ue = self.layout.served_ue(b);
            let link = draw_channel(&self.params, self.large_scale(b, ue), &mut self.fading_rng);
            let precoder = Precoder::conjugate(&link.estimated_channel)?;
            self.serving_power[b] = precoder.power_through(&link.true_channel)?;
            self.serving.push(link);
            precoders.push(precoder);
        }
        for (b, precoder) in precoders.iter().enumerate() {
            for k in 0..n {
                if k == self.layout.served_ue(b) {
                    continue;
                }
                let gain = self.large_scale[b * n + k].gain_linear();
                self.cross_power[b * n + k] = draw_projected_power(
                    gain,
                    precoder.gram_eigenvalues(),
                    self.params.n_rx,
                    &mut self.fading_rng,
                );
            }
        }
        Ok(())
    }

    /// Rates of every UE (indexed by its serving SC) under the joint action.
    pub fn rates(&mut self, actions: &[Action]) -> Result<Vec<RateSample>> {
        let n = self.len();
        if actions.len() != n {
            return Err(Error::DimensionMismatch(format!("{} actions for {n} SCs", actions.len())));
        }
        let noise = self.params.noise_power_w();
        let mut out = Vec::with_capacity(n);
        for b in 0..n {
            let ue = self.layout.served_ue(b);
            self.scratch.clear();
            for other in (0..n).filter(|&o| o != b) {
                self.scratch.push(InterferingLink {
                    sc: other,
                    channel_power: self.cross_power[other * n + ue],
                    tx_deviation_rad: self.geometry.tx_deviation_rad(other, ue),
                    rx_deviation_rad: self.geometry.rx_deviation_rad(other, ue),
                });
            }
            let serving = ServingLink {
                sc: b,
                channel_power: self.serving_power[b],
                noise_power_w: noise,
            };
            out.push(compute_rate(&serving, &self.scratch, actions, &self.budget)?);
        }
        Ok(out)
    }

    /// Steps the channel chain and redraws the fading when it is due.
    pub fn advance(&mut self) -> Result<()> {
        if self.process.step(&mut self.fading_rng) {
            self.redraw()?;
        }
        Ok(())
    }
}

/// What happened in one slot, indexed by SC.
#[derive(Clone, Debug, PartialEq)]
pub struct SlotOutcome {
    pub chosen: Vec<usize>,
    pub rates: Vec<RateSample>,
    pub utilities: Vec<f64>,
}

pub fn run_slot(network: &mut Network, agents: &mut [Agent]) -> Result<SlotOutcome> {
    if agents.len() != network.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} agents for {} SCs",
            agents.len(),
            network.len()
        )));
    }
    let chosen: Vec<usize> = agents.iter_mut().map(Agent::choose).collect();
    let actions: Vec<Action> = agents.iter().zip(&chosen).map(|(a, &m)| a.action(m)).collect();
    let rates = network.rates(&actions)?;
    let utilities = agents
        .iter_mut()
        .zip(&chosen)
        .zip(&rates)
        .map(|((agent, &m), r)| agent.learn(m, r.rate_norm))
        .collect::<Result<Vec<_>>>()?;
    network.advance()?;
    Ok(SlotOutcome {
        chosen,
        rates,
        utilities,
    })
}

/// Coordinates of one episode in a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EpisodeKey {
    pub density_per_km2: u32,
    pub topology: u32,
    pub agent: AgentKind,
}

/// Full per-slot record of one episode. Per-slot vectors are slot-major: `[t * n_sc + b]`.
#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeTrace {
    pub n_sc: usize,
    pub horizon: usize,
    pub chosen: Vec<u16>,
    pub rate_norm: Vec<f64>,
    pub utility: Vec<f64>,
    /// Mean strategy entropy across SCs, before the first slot and after each slot.
    pub mean_entropy: Vec<f64>,
    pub final_strategies: Vec<Vec<f64>>,
    /// Time-average rate of each UE in Gbps.
    pub throughput_gbps: Vec<f64>,
}

impl EpisodeTrace {
    /// Realized utilities of one SC over the horizon.
    pub fn utility_series(&self, sc: usize) -> Vec<f64> {
        (0..self.horizon).map(|t| self.utility[t * self.n_sc + sc]).collect()
    }

    /// Mean realized utility across SCs at each slot.
    pub fn mean_utility(&self) -> Vec<f64> {
        self.utility
            .chunks(self.n_sc.max(1))
            .map(|c| c.iter().sum::<f64>() / self.n_sc as f64)
            .collect()
    }
}

fn mean_entropy(agents: &[Agent]) -> f64 {
    agents.iter().map(|a| entropy(a.state().strategy())).sum::<f64>() / agents.len() as f64
}

/// Runs `horizon` slots of an already-built network and agent set.
pub fn run_agents(network: &mut Network, agents: &mut [Agent], horizon: usize) -> Result<EpisodeTrace> {
    let n = network.len();
    let mut trace = EpisodeTrace {
        n_sc: n,
        horizon,
        chosen: Vec::with_capacity(n * horizon),
        rate_norm: Vec::with_capacity(n * horizon),
        utility: Vec::with_capacity(n * horizon),
        mean_entropy: Vec::with_capacity(horizon + 1),
        final_strategies: Vec::new(),
        throughput_gbps: vec![0.0; n],
    };
    trace.mean_entropy.push(mean_entropy(agents));
    for _ in 0..horizon {
        let slot = run_slot(network, agents)?;
        for b in 0..n {
            trace.chosen.push(slot.chosen[b] as u16);
            trace.rate_norm.push(slot.rates[b].rate_norm);
            trace.utility.push(slot.utilities[b]);
            trace.throughput_gbps[b] += slot.rates[b].rate_bps * 1e-9;
        }
        trace.mean_entropy.push(mean_entropy(agents));
    }
    if horizon > 0 {
        for t in &mut trace.throughput_gbps {
            *t /= horizon as f64;
        }
    }
    trace.final_strategies = agents.iter().map(|a| a.state().strategy().to_vec()).collect();
    Ok(trace)
}

/// Builds the network of one Monte-Carlo cell from its seeds.
pub fn build_network(config: &SimConfig, cell: &CellSeeds) -> Result<Network> {
    let layout = generate_layout(
        &config.layout_params(cell.density_per_km2),
        &mut cell.rng(StreamRole::Layout),
    )?;
    Network::new(
        layout,
        config.channel_params(),
        &config.propagation(),
        config.link_budget()?,
        &mut cell.rng(StreamRole::LargeScale),
        cell.rng(StreamRole::Fading),
    )
}

/// One learner per SC of `network`, each on its own random stream.
pub fn build_agents(config: &SimConfig, cell: &CellSeeds, kind: AgentKind, n_sc: usize) -> Result<Vec<Agent>> {
    let params = config.agent_params()?;
    let space = config.action_space()?;
    (0..n_sc)
        .map(|b| Agent::new(kind, &params, &space, cell.agent_rng(b)))
        .collect()
}

pub fn run_episode(config: &SimConfig, key: EpisodeKey) -> Result<EpisodeTrace> {
    let cell = CellSeeds::new(config.master_seed, key.density_per_km2, key.topology);
    let mut network = build_network(config, &cell)?;
    let mut agents = build_agents(config, &cell, key.agent, network.len())?;
    run_agents(&mut network, &mut agents, config.horizon_slots)
}

/// Condensed episode result kept by sweeps.
#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeSummary {
    pub key: EpisodeKey,
    pub n_sc: usize,
    pub throughput_gbps: Vec<f64>,
    /// Sum over SCs of the realized utility at each slot.
    pub utility_sum: Vec<f64>,
    pub final_mean_entropy: f64,
}

impl EpisodeSummary {
    pub fn from_trace(key: EpisodeKey, trace: &EpisodeTrace) -> Self {
        Self {
            key,
            n_sc: trace.n_sc,
            throughput_gbps: trace.throughput_gbps.clone(),
            utility_sum: trace
                .utility
                .chunks(trace.n_sc.max(1))
                .map(|c| c.iter().sum())
                .collect(),
            final_mean_entropy: trace.mean_entropy.last().copied().unwrap_or(0.0),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct SweepResult {
    /// Successful episodes, ordered by density, topology, then agent order of the config.
    pub episodes: Vec<EpisodeSummary>,
    pub failures: Vec<(EpisodeKey, String)>,
}

impl SweepResult {
    pub fn get(&self, key: EpisodeKey) -> Option<&EpisodeSummary> {
        self.episodes.iter().find(|e| e.key == key)
    }

    /// Pooled per-UE throughputs of one agent at one density.
    pub fn pooled_throughput(&self, density: u32, agent: AgentKind) -> Vec<f64> {
        self.episodes
            .iter()
            .filter(|e| e.key.density_per_km2 == density && e.key.agent == agent)
            .flat_map(|e| e.throughput_gbps.iter().copied())
            .collect()
    }

    /// Mean realized utility per slot over all SCs and topologies.
    pub fn convergence(&self, density: u32, agent: AgentKind) -> Vec<f64> {
        let mut sum: Vec<f64> = Vec::new();
        let mut count = 0usize;
        for e in self
            .episodes
            .iter()
            .filter(|e| e.key.density_per_km2 == density && e.key.agent == agent)
        {
            if sum.is_empty() {
                sum = vec![0.0; e.utility_sum.len()];
            }
            for (s, u) in sum.iter_mut().zip(&e.utility_sum) {
                *s += u;
            }
            count += e.n_sc;
        }
        sum.iter().map(|s| s / count.max(1) as f64).collect()
    }
}

/// Every `(density, topology, agent)` cell of the config in output order.
pub fn sweep_keys(config: &SimConfig) -> Result<Vec<EpisodeKey>> {
    let kinds = config.agent_kinds()?;
    let mut keys = Vec::new();
    for &density_per_km2 in &config.densities_per_km2 {
        for topology in 0..config.n_topologies {
            for &agent in &kinds {
                keys.push(EpisodeKey {
                    density_per_km2,
                    topology,
                    agent,
                });
            }
        }
    }
    Ok(keys)
}

pub fn run_sweep(config: &SimConfig) -> Result<SweepResult> {
    config.validate()?;
    let keys = sweep_keys(config)?;
    let results: Vec<_> = keys
        .par_iter()
        .map(|&key| (key, run_episode(config, key).map(|t| EpisodeSummary::from_trace(key, &t))))
        .collect();
    let mut out = SweepResult::default();
    for (key, r) in results {
        match r {
            Ok(s) => out.episodes.push(s),
            Err(e) => out.failures.push((key, e.to_string())),
        }
    }
    Ok(out)
}

/// Writes `throughput.csv` (one row per UE per episode) and `convergence.csv`.
pub fn write_sweep_csvs(config: &SimConfig, sweep: &SweepResult, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut w = csv::Writer::from_path(dir.join("throughput.csv"))?;
    w.write_record(["density", "topology", "agent", "throughput_gbps"])?;
    for e in &sweep.episodes {
        for t in &e.throughput_gbps {
            w.write_record([
                e.key.density_per_km2.to_string(),
                e.key.topology.to_string(),
                e.key.agent.to_string(),
                t.to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io(dir.join("throughput.csv"), e))?;

    let mut w = csv::Writer::from_path(dir.join("convergence.csv"))?;
    w.write_record(["density", "agent", "slot", "mean_utility"])?;
    for &density in &config.densities_per_km2 {
        for agent in config.agent_kinds()? {
            for (slot, u) in sweep.convergence(density, agent).iter().enumerate() {
                w.write_record([density.to_string(), agent.to_string(), slot.to_string(), u.to_string()])?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(dir.join("convergence.csv"), e))?;

    if !sweep.failures.is_empty() {
        let mut w = csv::Writer::from_path(dir.join("failures.csv"))?;
        w.write_record(["density", "topology", "agent", "error"])?;
        for (k, msg) in &sweep.failures {
            w.write_record([
                k.density_per_km2.to_string(),
                k.topology.to_string(),
                k.agent.to_string(),
                msg.clone(),
            ])?;
        }
        w.flush().map_err(|e| Error::io(dir.join("failures.csv"), e))?;
    }
    Ok(())
}
