use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mmwave_rsl::engine::{build_network, run_sweep, write_sweep_csvs};
use mmwave_rsl::metrics::{read_throughput_csv, write_reports, ThroughputPool};
use mmwave_rsl::{CellSeeds, SimConfig};

#[derive(Parser)]
#[command(name = "mmwave-rsl", version, about = "Risk-sensitive beam and power learning simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the Monte-Carlo sweep and write all CSV outputs.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated subset of rsl, csl, bl1.
        #[arg(long, value_delimiter = ',')]
        agents: Option<Vec<String>>,
        #[arg(long, value_delimiter = ',')]
        densities: Option<Vec<u32>>,
        #[arg(long)]
        topologies: Option<u32>,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rebuild the reports from an existing throughput.csv.
    Metrics {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Write the layout of one topology.
    Layout {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        density: u32,
        #[arg(long, default_value_t = 0)]
        topology: u32,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load(path: Option<PathBuf>) -> mmwave_rsl::Result<SimConfig> {
    path.map_or_else(|| Ok(SimConfig::default()), SimConfig::load)
}

fn run(cli: Cli) -> mmwave_rsl::Result<()> {
    match cli.command {
        Command::Simulate {
            config,
            seed,
            agents,
            densities,
            topologies,
            horizon,
            out,
        } => {
            let mut cfg = load(config)?;
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            if let Some(a) = agents {
                cfg.agents = a;
            }
            if let Some(d) = densities {
                cfg.densities_per_km2 = d;
            }
            if let Some(t) = topologies {
                cfg.n_topologies = t;
            }
            if let Some(h) = horizon {
                cfg.horizon_slots = h;
            }
            if let Some(o) = out {
                cfg.out_dir = o;
            }
            cfg.validate()?;
            let sweep = run_sweep(&cfg)?;
            for (key, msg) in &sweep.failures {
                eprintln!("episode {key:?} failed: {msg}");
            }
            write_sweep_csvs(&cfg, &sweep, &cfg.out_dir)?;
            let mut pool = ThroughputPool::default();
            for e in &sweep.episodes {
                pool.insert(e.key.density_per_km2, e.key.agent, e.throughput_gbps.iter().copied());
            }
            write_reports(&pool, &cfg.reliability_targets_gbps, &cfg.availability_targets, &cfg.out_dir)?;
            std::fs::write(cfg.out_dir.join("config.toml"), cfg.to_toml_string())
                .map_err(|e| mmwave_rsl::Error::Io { path: cfg.out_dir.join("config.toml"), source: e })?;
            eprintln!(
                "{} episodes, {} failed, results in {}",
                sweep.episodes.len() + sweep.failures.len(),
                sweep.failures.len(),
                cfg.out_dir.display()
            );
        }
        Command::Metrics { input, config } => {
            let cfg = load(config)?;
            let rows = read_throughput_csv(&input.join("throughput.csv"))?;
            let pool = ThroughputPool::from_rows(&rows)?;
            write_reports(&pool, &cfg.reliability_targets_gbps, &cfg.availability_targets, &input)?;
        }
        Command::Layout {
            config,
            density,
            topology,
            out,
        } => {
            let cfg = load(config)?;
            let net = build_network(&cfg, &CellSeeds::new(cfg.master_seed, density, topology))?;
            net.layout().save(out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
