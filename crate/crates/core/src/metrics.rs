//! Throughput statistics and report files.
//!
//! All statistics pool per-UE throughputs across topologies. Rates are in Gbps.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learning::AgentKind;

fn check_samples(samples: &[f64], min: usize, what: &'static str) -> Result<()> {
    if samples.len() < min {
        return Err(Error::NotEnoughSamples(what, samples.len()));
    }
    if let Some(&bad) = samples.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(Error::InvalidSample(bad));
    }
    Ok(())
}

/// Empirical complementary CDF, `Pr(UT >= r)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ccdf {
    sorted: Vec<f64>,
}

impl Ccdf {
    pub fn survival(&self, r: f64) -> f64 {
        let below = self.sorted.partition_point(|&x| x < r);
        (self.sorted.len() - below) as f64 / self.sorted.len() as f64
    }

    /// `(value, survival)` at each distinct sample, ascending.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let n = self.sorted.len() as f64;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (i, &x) in self.sorted.iter().enumerate() {
            if out.last().is_some_and(|p| p.0 == x) {
                continue;
            }
            out.push((x, (self.sorted.len() - i) as f64 / n));
        }
        out
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }
}

pub fn ccdf(samples: &[f64]) -> Result<Ccdf> {
    check_samples(samples, 1, "ccdf")?;
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(Ccdf { sorted })
}

/// Fraction of UEs strictly above `r0`.
pub fn reliability(samples: &[f64], r0: f64) -> Result<f64> {
    check_samples(samples, 1, "reliability")?;
    Ok(samples.iter().filter(|&&x| x > r0).count() as f64 / samples.len() as f64)
}

/// Largest rate guaranteed to at least a fraction `p` of UEs.
pub fn availability(samples: &[f64], p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::param("availability target", format!("{p} is outside (0, 1)")));
    }
    let c = ccdf(samples)?;
    let n = c.sorted.len();
    // survival of sorted[i] is at least (n - i) / n
    let need = ((p * n as f64) - 1e-9).ceil().max(1.0) as usize;
    Ok(c.sorted[n - need.min(n)])
}

/// Unbiased sample variance.
pub fn variance(samples: &[f64]) -> Result<f64> {
    check_samples(samples, 2, "variance")?;
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    Ok(samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0))
}

/// Pointwise mean of equally long series.
pub fn convergence_trace(series: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = series.first().ok_or(Error::NotEnoughSamples("convergence", 0))?;
    let len = first.len();
    if let Some(s) = series.iter().find(|s| s.len() != len) {
        return Err(Error::DimensionMismatch(format!("series of length {} and {len}", s.len())));
    }
    Ok((0..len)
        .map(|t| series.iter().map(|s| s[t]).sum::<f64>() / series.len() as f64)
        .collect())
}

/// One line of `throughput.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThroughputRow {
    pub density: u32,
    pub topology: u32,
    pub agent: String,
    pub throughput_gbps: f64,
}

pub fn read_throughput_csv(path: &Path) -> Result<Vec<ThroughputRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub agent: AgentKind,
    pub density: u32,
    pub mean_ut_gbps: f64,
    pub variance_gbps2: f64,
    pub std_error_gbps: f64,
    pub n: usize,
}

/// Per-(density, agent) pooled throughputs with the derived statistics.
#[derive(Clone, Debug, Default)]
pub struct ThroughputPool {
    pools: BTreeMap<(u32, AgentKind), Vec<f64>>,
}

impl ThroughputPool {
    pub fn from_rows(rows: &[ThroughputRow]) -> Result<Self> {
        let mut pools: BTreeMap<(u32, AgentKind), Vec<f64>> = BTreeMap::new();
        for row in rows {
            let kind: AgentKind = row.agent.parse()?;
            pools.entry((row.density, kind)).or_default().push(row.throughput_gbps);
        }
        Ok(Self { pools })
    }

    pub fn insert(&mut self, density: u32, agent: AgentKind, samples: impl IntoIterator<Item = f64>) {
        self.pools.entry((density, agent)).or_default().extend(samples);
    }

    pub fn get(&self, density: u32, agent: AgentKind) -> Option<&[f64]> {
        self.pools.get(&(density, agent)).map(Vec::as_slice)
    }

    pub fn densities(&self) -> Vec<u32> {
        let mut d: Vec<u32> = self.pools.keys().map(|k| k.0).collect();
        d.dedup();
        d
    }

    pub fn agents(&self) -> Vec<AgentKind> {
        let mut a: Vec<AgentKind> = self.pools.keys().map(|k| k.1).collect();
        a.sort();
        a.dedup();
        a
    }

    pub fn summary(&self) -> Result<Vec<SummaryRow>> {
        self.pools
            .iter()
            .map(|(&(density, agent), s)| {
                let n = s.len();
                let var = if n >= 2 { variance(s)? } else { 0.0 };
                check_samples(s, 1, "summary")?;
                Ok(SummaryRow {
                    agent,
                    density,
                    mean_ut_gbps: s.iter().sum::<f64>() / n as f64,
                    variance_gbps2: var,
                    std_error_gbps: (var / n as f64).sqrt(),
                    n,
                })
            })
            .collect()
    }
}

fn flush(w: &mut csv::Writer<std::fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes the CCDF, reliability, availability and summary reports into `dir`.
pub fn write_reports(
    pool: &ThroughputPool,
    reliability_targets_gbps: &[f64],
    availability_targets: &[f64],
    dir: &Path,
) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (&(density, agent), samples) in &pool.pools {
        let path = dir.join(format!("ccdf_{agent}_{density}.csv"));
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(["throughput_gbps", "survival"])?;
        for (x, s) in ccdf(samples)?.points() {
            w.write_record([x.to_string(), s.to_string()])?;
        }
        flush(&mut w, &path)?;
    }

    let path = dir.join("reliability.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["density", "r0_gbps", "agent", "fraction"])?;
    for density in pool.densities() {
        for &r0 in reliability_targets_gbps {
            for agent in pool.agents() {
                if let Some(s) = pool.get(density, agent) {
                    let f = reliability(s, r0)?;
                    w.write_record([density.to_string(), r0.to_string(), agent.to_string(), f.to_string()])?;
                }
            }
        }
    }
    flush(&mut w, &path)?;

    let path = dir.join("availability.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["density", "target_prob", "agent", "rate_gbps"])?;
    for density in pool.densities() {
        for &p in availability_targets {
            for agent in pool.agents() {
                if let Some(s) = pool.get(density, agent) {
                    let r = availability(s, p)?;
                    w.write_record([density.to_string(), p.to_string(), agent.to_string(), r.to_string()])?;
                }
            }
        }
    }
    flush(&mut w, &path)?;

    let path = dir.join("summary.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["agent", "density", "mean_ut_gbps", "variance_gbps2", "std_error_gbps", "n"])?;
    for row in pool.summary()? {
        w.write_record([
            row.agent.to_string(),
            row.density.to_string(),
            row.mean_ut_gbps.to_string(),
            row.variance_gbps2.to_string(),
            row.std_error_gbps.to_string(),
            row.n.to_string(),
        ])?;
    }
    flush(&mut w, &path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn one_to_hundred() -> Vec<f64> {
        (1..=100).map(f64::from).collect()
    }

    #[test]
    fn ccdf_step_values() {
        let c = ccdf(&[3.0, 1.0, 2.0, 2.0]).unwrap();
        assert_eq!(c.survival(0.5), 1.0);
        assert_eq!(c.survival(2.0), 0.75);
        assert_eq!(c.survival(2.5), 0.25);
        assert_eq!(c.survival(3.5), 0.0);
        assert_eq!(c.points(), vec![(1.0, 1.0), (2.0, 0.75), (3.0, 0.25)]);
    }

    #[test]
    fn reliability_is_strict() {
        let s = one_to_hundred();
        assert_eq!(reliability(&s, 90.0).unwrap(), 0.10);
        assert_eq!(reliability(&s, 0.0).unwrap(), 1.0);
        assert_eq!(reliability(&s, 100.0).unwrap(), 0.0);
    }

    #[test]
    fn availability_on_integers() {
        let s = one_to_hundred();
        // 90 of 100 samples are >= 11
        assert_eq!(availability(&s, 0.9).unwrap(), 11.0);
        assert_eq!(availability(&s, 0.995).unwrap(), 1.0);
        assert_eq!(availability(&[4.0; 7], 0.3).unwrap(), 4.0);
        assert_eq!(availability(&s, 0.01).unwrap(), 100.0);
        assert!(availability(&s, 0.0).is_err());
        assert!(availability(&s, 1.0).is_err());
    }

    #[test]
    fn hand_counted_examples() {
        let s = [1.0, 2.0, 3.0];
        assert_eq!(ccdf(&s).unwrap().survival(2.0), 2.0 / 3.0);
        assert_eq!(ccdf(&s).unwrap().survival(0.0), 1.0);
        assert_eq!(reliability(&s, 3.0).unwrap(), 0.0);
        assert_eq!(variance(&[0.0, 2.0]).unwrap(), 2.0);
        assert_eq!(variance(&[3.0; 5]).unwrap(), 0.0);
    }

    #[test]
    fn variance_matches_textbook() {
        assert_eq!(variance(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]).unwrap(), 32.0 / 7.0);
        assert!(variance(&[1.0]).is_err());
    }

    #[test]
    fn bad_samples_are_rejected() {
        assert!(ccdf(&[]).is_err());
        assert!(ccdf(&[1.0, f64::NAN]).is_err());
        assert!(reliability(&[-1.0], 0.0).is_err());
    }

    #[test]
    fn convergence_trace_means_pointwise() {
        let t = convergence_trace(&[vec![0.0, 1.0], vec![2.0, 3.0]]).unwrap();
        assert_eq!(t, vec![1.0, 2.0]);
        assert!(convergence_trace(&[vec![0.0], vec![1.0, 2.0]]).is_err());
        assert!(convergence_trace(&[]).is_err());
    }

    #[test]
    fn reports_have_fixed_headers() {
        let dir = tempfile::tempdir().unwrap();
        let mut pool = ThroughputPool::default();
        pool.insert(16, AgentKind::Rsl, [1.0, 2.0, 3.0]);
        pool.insert(16, AgentKind::Bl1, [0.5, 2.5]);
        write_reports(&pool, &[2.0], &[0.9], dir.path()).unwrap();
        let head = |f: &str| {
            std::fs::read_to_string(dir.path().join(f)).unwrap().lines().next().unwrap().to_string()
        };
        assert_eq!(head("ccdf_rsl_16.csv"), "throughput_gbps,survival");
        assert_eq!(head("reliability.csv"), "density,r0_gbps,agent,fraction");
        assert_eq!(head("availability.csv"), "density,target_prob,agent,rate_gbps");
        assert_eq!(head("summary.csv"), "agent,density,mean_ut_gbps,variance_gbps2,std_error_gbps,n");
    }

    proptest! {
        #[test]
        fn statistics_ignore_order(mut xs in prop::collection::vec(0.0f64..10.0, 2..60), r0 in 0.0f64..10.0, p in 0.01f64..0.99) {
            let (rel, av, var) = (reliability(&xs, r0).unwrap(), availability(&xs, p).unwrap(), variance(&xs).unwrap());
            xs.reverse();
            xs.rotate_left(1);
            prop_assert_eq!(reliability(&xs, r0).unwrap(), rel);
            prop_assert_eq!(availability(&xs, p).unwrap(), av);
            prop_assert!((variance(&xs).unwrap() - var).abs() <= 1e-9 * var.max(1.0));
        }

        #[test]
        fn survival_is_monotone(xs in prop::collection::vec(0.0f64..10.0, 1..40), a in 0.0f64..10.0, b in 0.0f64..10.0) {
            let c = ccdf(&xs).unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(c.survival(lo) >= c.survival(hi));
        }

        #[test]
        fn availability_meets_its_target(xs in prop::collection::vec(0.0f64..10.0, 1..40), p in 0.01f64..0.99) {
            let r = availability(&xs, p).unwrap();
            prop_assert!(ccdf(&xs).unwrap().survival(r) >= p - 1e-9);
            prop_assert!(availability(&xs, (p - 0.1).max(0.005)).unwrap() >= r);
        }

        #[test]
        fn variance_scales_quadratically(xs in prop::collection::vec(0.0f64..10.0, 2..30), c in 0.1f64..5.0) {
            let scaled: Vec<f64> = xs.iter().map(|x| c * x).collect();
            let (v, vs) = (variance(&xs).unwrap(), variance(&scaled).unwrap());
            prop_assert!((vs - c * c * v).abs() <= 1e-9 * vs.max(1.0));
        }
    }
}
