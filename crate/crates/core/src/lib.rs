//! Decentralized, risk-sensitive beamwidth and transmit-power learning for
//! dense mmWave small-cell networks.
//!
//! Each small cell (SC) serves one user (UE) and runs an independent learner
//! that only observes its own rate. [`engine`] wires the physical layer and
//! the learners into a slot loop; [`metrics`] turns per-UE throughputs into
//! tail statistics.
//!
//! ```
//! use mmwave_rsl::{run_episode, AgentKind, EpisodeKey, SimConfig};
//!
//! let config = SimConfig { horizon_slots: 20, ..SimConfig::default() };
//! let key = EpisodeKey { density_per_km2: 24, topology: 0, agent: AgentKind::Rsl };
//! let trace = run_episode(&config, key).unwrap();
//! assert_eq!(trace.n_sc, 6);
//! assert_eq!(trace.throughput_gbps.len(), 6);
//! ```

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod config;
pub mod engine;
pub mod error;
pub mod learning;
pub mod metrics;
pub mod phy;
pub mod rng;
pub mod topology;

pub use config::SimConfig;
pub use engine::{run_episode, run_slot, run_sweep, EpisodeKey, EpisodeSummary, EpisodeTrace, Network, SweepResult};
pub use error::{Error, Result};
pub use learning::{Action, ActionSpace, Agent, AgentKind};
pub use rng::{CellSeeds, SimRng};

// Compiles the guide's rust snippets as doc-tests.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $file:literal) => {
            #[doc = include_str!(concat!("../../../book/src/", $file))]
            pub struct $name;
        };
    }
    chapter!(Introduction, "introduction.md");
    chapter!(Topology, "topology.md");
    chapter!(Channel, "channel.md");
    chapter!(Antennas, "antennas.md");
    chapter!(Learning, "learning.md");
    chapter!(Engine, "engine.md");
    chapter!(Metrics, "metrics.md");
    chapter!(Cli, "cli.md");
}
