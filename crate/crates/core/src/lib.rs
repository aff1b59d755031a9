//! Simulator for fairness-aware federated learning.
//!
//! The server aggregates client models with weights proportional to
//! `p_k · F_k^q`, where `F_k` is the loss a client reports for the current
//! global model. `q = 0` is FedAvg; larger `q` leans toward the worst-served
//! clients. A small policy network can choose `q` each round and learn from
//! a reward that favours accurate, evenly-performing models.
//!
//! Everything is seeded: two runs with the same configuration produce
//! bit-identical logs.
//!
//! ```
//! use dqffl::{federation, RunConfig, StrategyConfig};
//!
//! let mut cfg = RunConfig::new(StrategyConfig::static_q(1.0));
//! cfg.rounds = 3;
//! let summary = federation::run(&cfg).unwrap();
//! assert_eq!(summary.rounds.len(), 3);
//! assert!(summary.fairness.mean > 0.0);
//! ```

pub mod agent;
pub mod aggregation;
pub mod data;
pub mod error;
pub mod experiment;
pub mod federation;
pub mod metrics;
pub mod model;
pub mod rng;
pub mod textio;
pub mod trainer;

#[cfg(test)]
mod testutil;

/// Version tag written into every persisted artifact.
pub const SCHEMA_VERSION: u32 = 1;

pub use agent::{Agent, AgentConfig, QGrid};
pub use aggregation::{Strategy, StrategyConfig};
pub use data::{FederatedDataset, SynthConfig};
pub use error::{Error, Result};
pub use experiment::ExperimentConfig;
pub use federation::{RunConfig, RunSummary, Seeds};
pub use metrics::FairnessReport;
pub use model::{ModelSpec, ParamVector};
pub use trainer::LocalConfig;
