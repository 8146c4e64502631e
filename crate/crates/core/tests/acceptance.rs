//! Acceptance gate.
//!
//! One test per criterion; each prints a single `[PASS]`/`[FAIL]` line on
//! stderr (uncaptured) before asserting. The Monte-Carlo criteria share one
//! sweep: densities {16, 24, 48, 96}, 10 paired topologies, 4000 slots.
//!
//! Run with `cargo test --test acceptance -- --test-threads=1` for ordered output.

use std::io::Write;
use std::path::Path;
use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};

use mmwave_rsl::channel::{draw_channel, LargeScale};
use mmwave_rsl::engine::{build_agents, run_agents, write_sweep_csvs, Network};
use mmwave_rsl::learning::{
    entropy, gibbs_strategy, risk_utility, rsl_update, AgentState, LearningSchedule,
};
use mmwave_rsl::metrics::{availability, ccdf, reliability, variance, write_reports, ThroughputPool};
use mmwave_rsl::phy::{main_lobe_gain, precoded_power};
use mmwave_rsl::topology::{NetworkLayout, Point};
use mmwave_rsl::{run_sweep, AgentKind, CellSeeds, SimConfig, SimRng, SweepResult};

const TOPOLOGIES: u32 = 10;
const HORIZON: usize = 4000;
const RELIABILITY_DENSITIES: [u32; 3] = [16, 48, 96];

fn report(name: &str, pass: bool, detail: impl AsRef<str>) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "[{tag}] {name}: {}", detail.as_ref());
}

fn sweep_config() -> SimConfig {
    SimConfig {
        densities_per_km2: vec![16, 24, 48, 96],
        n_topologies: TOPOLOGIES,
        horizon_slots: HORIZON,
        ..SimConfig::default()
    }
}

fn sweep() -> &'static SweepResult {
    static SWEEP: OnceLock<SweepResult> = OnceLock::new();
    SWEEP.get_or_init(|| {
        let t = Instant::now();
        let s = run_sweep(&sweep_config()).unwrap();
        assert!(s.failures.is_empty(), "failed cells: {:?}", s.failures);
        let _ = writeln!(
            std::io::stderr(),
            "shared sweep: {} episodes in {:.1} s",
            s.episodes.len(),
            t.elapsed().as_secs_f64()
        );
        s
    })
}

fn pooled(density: u32, agent: AgentKind) -> Vec<f64> {
    sweep().pooled_throughput(density, agent)
}

/// Upper quartile of every UE throughput at the reliability densities, all agents pooled.
fn upper_quartile_r0() -> f64 {
    let all: Vec<f64> = RELIABILITY_DENSITIES
        .iter()
        .flat_map(|&d| AgentKind::ALL.iter().flat_map(move |&a| pooled(d, a)))
        .collect();
    availability(&all, 0.25).unwrap()
}

/// Number of consecutive pairs where the sequence increases.
fn increases(xs: &[f64]) -> usize {
    xs.windows(2).filter(|w| w[1] > w[0]).count()
}

#[test]
fn invariant_suite() {
    let t = Instant::now();
    let mut rng = SimRng::seed_from_u64(0xACCE);
    let mut worst_conservation = 0.0f64;
    let mut failures = Vec::new();
    for _ in 0..20_000 {
        // antenna power conservation
        let theta = rng.random_range(1e-3..std::f64::consts::TAU);
        let eta = rng.random_range(1e-6..1.0 / 3.0);
        let total = theta * main_lobe_gain(theta, eta) + (std::f64::consts::TAU - theta) * eta;
        worst_conservation = worst_conservation.max((total - std::f64::consts::TAU).abs());

        // Gibbs closure
        let n = rng.random_range(1..40);
        let u: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let kappa = rng.random_range(0.05..20.0);
        let b = gibbs_strategy(&u, kappa);
        if (b.iter().sum::<f64>() - 1.0).abs() > 1e-12 || b.iter().any(|p| *p < 0.0) {
            failures.push("pmf closure");
        }

        // risk utility: increasing and concave where f64 resolves the derivatives
        let mu = rng.random_range(-5.0..-0.01);
        let r = rng.random_range(0.0..3.0);
        let h = 1e-3;
        let f = |x: f64| risk_utility(x, mu).unwrap();
        let (d1, d2) = ((f(r + h) - f(r - h)) / (2.0 * h), (f(r + h) - 2.0 * f(r) + f(r - h)) / (h * h));
        if d1 <= 0.0 || (d2 >= 0.0 && (mu * r).exp() * mu.abs() > 1e-6) {
            failures.push("risk utility shape");
        }

        // ccdf monotone
        let xs: Vec<f64> = (0..rng.random_range(1..50)).map(|_| rng.random_range(0.0..10.0)).collect();
        let c = ccdf(&xs).unwrap();
        let (a, z): (f64, f64) = (rng.random_range(0.0..10.0), rng.random_range(0.0..10.0));
        if c.survival(a.min(z)) < c.survival(a.max(z)) || c.survival(0.0) != 1.0 {
            failures.push("ccdf monotone");
        }
    }

    // Gibbs limits
    let u = [0.1, 0.4, 0.3];
    let cold = gibbs_strategy(&u, 1e-4);
    let hot = gibbs_strategy(&u, 1e6);
    if (cold[1] - 1.0).abs() > 1e-12 || hot.iter().any(|p| (p - 1.0 / 3.0).abs() > 1e-6) {
        failures.push("gibbs limits");
    }

    // schedule: both steps square-summable, zeta not summable, iota/zeta vanishing
    let s = LearningSchedule::default();
    let n = 1_000_000u64;
    let (mut z, mut z2, mut i2) = (0.0, 0.0, 0.0);
    for t in 1..=n {
        z += s.zeta(t);
        z2 += s.zeta(t).powi(2);
        i2 += s.iota(t).powi(2);
    }
    let ratio_falls = s.iota(10) / s.zeta(10) > s.iota(n) / s.zeta(n);
    if z2 > 1.0 + 1.0 / 0.1 || i2 > 1.0 + 1.0 / 0.2 || z < 0.9 * (n as f64).powf(0.45) / 0.45 || !ratio_falls {
        failures.push("two-timescale schedule");
    }

    // a learner's strategy stays a pmf under arbitrary utility sequences
    let mut state = AgentState::new(33, 5.0).unwrap();
    for _ in 0..5000 {
        let m = rng.random_range(0..33);
        rsl_update(&mut state, m, rng.random_range(-1.0..1.0), &s).unwrap();
    }
    if (state.strategy().iter().sum::<f64>() - 1.0).abs() > 1e-9 || entropy(state.strategy()) > 33f64.ln() + 1e-12 {
        failures.push("strategy pmf after updates");
    }

    if worst_conservation > 1e-12 {
        failures.push("power conservation");
    }
    let secs = t.elapsed().as_secs_f64();
    let pass = failures.is_empty() && secs < 60.0;
    report(
        "invariant suite",
        pass,
        format!("failures {failures:?}, worst conservation error {worst_conservation:.1e}, {secs:.1} s"),
    );
    assert!(pass);
}

#[test]
fn bandit_sanity_oracle() {
    let t = Instant::now();
    let config = SimConfig::default();
    let space = config.action_space().unwrap();
    let params = config.channel_params();
    let budget = config.link_budget().unwrap();
    // cell-edge gain so that actions are distinguishable in utility
    let large = LargeScale { los: false, gain_db: -150.0 };

    // oracle: 1e4 rate draws per action, SNR assembled from first principles
    let mut rng = SimRng::seed_from_u64(0x0AC1E);
    let noise = 1.380649e-23 * 290.0 * params.bandwidth_hz * 10f64.powf(params.noise_figure_db / 10.0);
    let rx_gain = main_lobe_gain(config.rx_beamwidth_rad, config.sidelobe_gain);
    let element = 10f64.powf(config.antenna_gain_dbi / 10.0);
    let mut expected = vec![0.0; space.len()];
    for _ in 0..10_000 {
        let link = draw_channel(&params, large, &mut rng);
        let s = precoded_power(&link.true_channel, &link.estimated_channel).unwrap();
        for (m, a) in space.actions().iter().enumerate() {
            let snr = a.power_w * element * main_lobe_gain(a.beamwidth_rad, config.sidelobe_gain) * rx_gain * s / noise;
            let r = params.bandwidth_hz * (1.0 + snr).log2() / 1e9;
            expected[m] += ((config.risk_mu * r).exp() - 1.0) / config.risk_mu / 10_000.0;
        }
    }
    let best = (0..space.len()).max_by(|&a, &b| expected[a].total_cmp(&expected[b])).unwrap();
    let mut sorted = expected.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));

    let layout = NetworkLayout::new(200.0, vec![Point::new(50.0, 100.0)], vec![Point::new(150.0, 100.0)]).unwrap();
    let mut net = Network::with_large_scale(layout, vec![large], params, budget, SimRng::seed_from_u64(7)).unwrap();
    let cell = CellSeeds::new(7, 1, 0);
    let mut agents = build_agents(&config, &cell, AgentKind::Rsl, 1).unwrap();
    let trace = run_agents(&mut net, &mut agents, HORIZON).unwrap();
    let pi = &trace.final_strategies[0];
    let mass = pi[best];
    let secs = t.elapsed().as_secs_f64();
    let pass = mass >= 0.5 && secs < 120.0;
    report(
        "bandit sanity oracle",
        pass,
        format!(
            "oracle best {:?} (E[u] {:.5}, runner-up {:.5}); final mass on it {mass:.4} (max mass {:.4}, uniform {:.4}); {secs:.1} s",
            space.actions()[best],
            sorted[0],
            sorted[1],
            pi.iter().cloned().fold(0.0, f64::max),
            1.0 / space.len() as f64
        ),
    );
    assert!(pass);
}

#[test]
fn variance_ordering() {
    let rsl = pooled(24, AgentKind::Rsl);
    let csl = pooled(24, AgentKind::Csl);
    let (vr, vc) = (variance(&rsl).unwrap(), variance(&csl).unwrap());
    let pass = vr < vc;
    report(
        "variance ordering",
        pass,
        format!("density 24, {} UEs: var RSL {vr:.4} vs CSL {vc:.4} Gbps^2 (reference 0.4846 vs 2.6893)", rsl.len()),
    );
    assert!(pass);
}

#[test]
fn reliability_ordering() {
    let r0 = upper_quartile_r0();
    let rel = |d, a| reliability(&pooled(d, a), r0).unwrap();
    let mut rsl_csl = 0;
    let mut csl_bl1 = 0;
    let mut rows = Vec::new();
    for d in RELIABILITY_DENSITIES {
        let (r, c, b) = (rel(d, AgentKind::Rsl), rel(d, AgentKind::Csl), rel(d, AgentKind::Bl1));
        rsl_csl += usize::from(r < c);
        csl_bl1 += usize::from(c < b);
        rows.push(format!("{d}: {r:.3}/{c:.3}/{b:.3}"));
    }
    let drop = |a| {
        let (lo, hi) = (rel(16, a), rel(96, a));
        if lo > 0.0 { 100.0 * (lo - hi) / lo } else { 0.0 }
    };
    let pass = rsl_csl <= 1 && csl_bl1 <= 1;
    report(
        "reliability ordering",
        pass,
        format!(
            "r0 {r0:.3} Gbps; RSL/CSL/BL1 {}; violations RSL>=CSL {rsl_csl}, CSL>=BL1 {csl_bl1}; \
             16->96 degradation RSL {:.2}% CSL {:.2}% BL1 {:.2}% (reference 11.61/16.72/39.11%)",
            rows.join(", "),
            drop(AgentKind::Rsl),
            drop(AgentKind::Csl),
            drop(AgentKind::Bl1)
        ),
    );
    assert!(pass);
}

#[test]
fn density_tradeoff() {
    let r0 = upper_quartile_r0();
    let mut pass = true;
    let mut rows = Vec::new();
    for a in AgentKind::ALL {
        let rel: Vec<f64> = RELIABILITY_DENSITIES.iter().map(|&d| reliability(&pooled(d, a), r0).unwrap()).collect();
        let av: Vec<f64> = RELIABILITY_DENSITIES.iter().map(|&d| availability(&pooled(d, a), 0.9).unwrap()).collect();
        let (vr, va) = (increases(&rel), increases(&av));
        pass &= vr <= 1 && va <= 1;
        rows.push(format!("{a}: rel {rel:.3?} ({vr} up), avail90 {av:.3?} ({va} up)"));
    }
    report("density tradeoff", pass, format!("r0 {r0:.3} Gbps; {}", rows.join("; ")));
    assert!(pass);
}

#[test]
fn availability_gap() {
    let lowest = 16;
    let (rsl, bl1) = (
        availability(&pooled(lowest, AgentKind::Rsl), 0.9).unwrap(),
        availability(&pooled(lowest, AgentKind::Bl1), 0.9).unwrap(),
    );
    let mut quantile_ok = true;
    let mut gains = Vec::new();
    for d in [16, 24, 48, 96] {
        for a in AgentKind::ALL {
            let s = pooled(d, a);
            let (a80, a90) = (availability(&s, 0.8).unwrap(), availability(&s, 0.9).unwrap());
            quantile_ok &= a80 >= a90;
            if d == lowest {
                gains.push(format!("{a} +{:.1}%", 100.0 * (a80 - a90) / a90));
            }
        }
    }
    let pass = rsl > bl1 && quantile_ok;
    report(
        "availability gap",
        pass,
        format!(
            "density {lowest}: avail90 RSL {rsl:.3} vs BL1 {bl1:.3} Gbps; avail80>=avail90 everywhere: {quantile_ok}; \
             80% vs 90% at {lowest}: {} (reference +5%)",
            gains.join(", ")
        ),
    );
    assert!(pass);
}

/// First slot at which the trailing-mean trace reaches 95% of the final level.
fn time_to_95(trace: &[f64]) -> (usize, f64) {
    const WINDOW: usize = 100;
    const TAIL: usize = 400;
    let last = &trace[trace.len() - TAIL..];
    let target = 0.95 * last.iter().sum::<f64>() / TAIL as f64;
    let mut sum = 0.0;
    for (t, u) in trace.iter().enumerate() {
        sum += u;
        if t >= WINDOW {
            sum -= trace[t - WINDOW];
        }
        if sum / (t + 1).min(WINDOW) as f64 >= target {
            return (t, target / 0.95);
        }
    }
    (trace.len(), target / 0.95)
}

#[test]
fn convergence_speed() {
    let rsl = sweep().convergence(24, AgentKind::Rsl);
    let csl = sweep().convergence(24, AgentKind::Csl);
    let (tr, fr) = time_to_95(&rsl);
    let (tc, fc) = time_to_95(&csl);
    let pass = tr < tc;
    report(
        "convergence",
        pass,
        format!("density 24, {TOPOLOGIES} topologies: RSL hits 95% of {fr:.4} at slot {tr}, CSL 95% of {fc:.4} at slot {tc}"),
    );
    assert!(pass);
}

fn csv_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

#[test]
fn determinism() {
    let config = SimConfig {
        densities_per_km2: vec![16, 48],
        n_topologies: 3,
        horizon_slots: 300,
        ..SimConfig::default()
    };
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for dir in &dirs {
        let sweep = run_sweep(&config).unwrap();
        write_sweep_csvs(&config, &sweep, dir.path()).unwrap();
        let mut pool = ThroughputPool::default();
        for e in &sweep.episodes {
            pool.insert(e.key.density_per_km2, e.key.agent, e.throughput_gbps.iter().copied());
        }
        write_reports(&pool, &config.reliability_targets_gbps, &config.availability_targets, dir.path()).unwrap();
    }
    let (a, b) = (csv_bytes(dirs[0].path()), csv_bytes(dirs[1].path()));
    let pass = a == b && a.len() >= 10;
    report("determinism", pass, format!("{} CSV files compared byte for byte", a.len()));
    assert!(pass);
}
