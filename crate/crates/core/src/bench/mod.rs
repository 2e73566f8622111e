//! Experiment bench: scenario configuration, EVM metrology, the link
//! pipelines, named experiments and deterministic sweeps with CSV/JSON
//! output.

pub mod config;
pub mod evm;
pub mod experiments;
pub mod link;
pub mod sweep;

pub use config::{parse_config, ScenarioConfig, SweepAxis};
pub use evm::{compute_evm, evm_db, meets_requirement};
pub use experiments::{find_experiment, registry, Experiment};
pub use sweep::{
    derive_seed, emit_results, run_experiment, PointOutcome, PointRecord, RunOptions, SweepResult,
};
