//! Experiment plumbing: configuration, the Monte-Carlo engine, presets and
//! result emission.

pub mod config;
pub mod emit;
pub mod engine;
pub mod presets;

pub use config::{
    load_config, load_config_file, load_config_with_env, ExperimentSpec, OutputKind, QosTarget, Sweep, SweepParam,
    SweepPoint, SweepValue,
};
pub use emit::{write_ccdf, write_kpi_table, write_optimizer_report, Format};
pub use engine::{evaluate_point, run_experiment, ExperimentResult, PointOptimum, ResultRow};
pub use presets::{preset, PRESET_NAMES};
