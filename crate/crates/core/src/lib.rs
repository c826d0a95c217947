//! Monte-Carlo analysis of multi-connectivity command-and-control links for
//! aerial vehicles: ground cellular, CoMP, relay swarms, HAP and LEO
//! satellites, combined by packet cloning.

// `!(x > 0.0)` style checks are meant to reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod antenna;
pub mod channel;
pub mod error;
pub mod harness;
pub mod mc_kpi;
pub mod optimizer;
pub mod paths;
pub mod phy;
pub mod queueing;
pub mod rng;
pub mod scenario;
pub mod special;
pub mod units;

pub use error::{ConfigError, Error, FieldIssue, Result};
pub use harness::{run_experiment, ExperimentResult, ExperimentSpec, ResultRow};
pub use mc_kpi::{KpiEstimate, McPath, PathKind};
pub use optimizer::{best_mc_path, CandidateKpi, QosConstraint, Selection};
pub use paths::{PathRealization, Rat};
pub use scenario::{Band, ScenarioConfig};
