//! Named experiments. Each one evaluates a single (grid point, repeat) from
//! a resolved config and a seed; the sweep runner does the rest.

mod dmimo;
mod downlink;
mod interference;
mod uplink;

pub use dmimo::{Calibrate, DmimoDownlink, DmimoUplink, ReciprocityCompare};
pub use downlink::DownlinkP2p;
pub use interference::{InbandInterference, OobInterference};
pub use uplink::{Bandwidth, DitherSweep, DynamicRange, SamplingRate};

use super::config::{ScenarioConfig, SweepAxis};
use super::sweep::PointOutcome;
use crate::error::{Error, Result};

/// One registered experiment.
pub trait Experiment: Sync {
    /// Name used on the command line.
    fn name(&self) -> &'static str;

    /// One-line description for `list`.
    fn description(&self) -> &'static str;

    /// Sweep used when the config declares none.
    fn default_axes(&self) -> Vec<SweepAxis> {
        Vec::new()
    }

    /// Adjusts the config for what the experiment structurally requires.
    fn prepare(&self, cfg: &ScenarioConfig) -> Result<ScenarioConfig> {
        Ok(cfg.clone())
    }

    /// Evaluates one grid point with one seed.
    fn run_point(&self, cfg: &ScenarioConfig, seed: u64) -> Result<PointOutcome>;
}

/// All experiments, in listing order.
pub fn registry() -> Vec<Box<dyn Experiment>> {
    vec![
        Box::new(DownlinkP2p),
        Box::new(DitherSweep),
        Box::new(DynamicRange),
        Box::new(Bandwidth),
        Box::new(SamplingRate),
        Box::new(InbandInterference),
        Box::new(OobInterference),
        Box::new(ReciprocityCompare),
        Box::new(Calibrate),
        Box::new(DmimoDownlink),
        Box::new(DmimoUplink),
    ]
}

/// Looks an experiment up by name.
pub fn find_experiment(name: &str) -> Result<Box<dyn Experiment>> {
    let all = registry();
    let names: Vec<&str> = all.iter().map(|e| e.name()).collect();
    let registered = names.join(", ");
    all.into_iter()
        .find(|e| e.name() == name)
        .ok_or(Error::UnknownExperiment {
            name: name.to_string(),
            registered,
        })
}

/// Per-UE metric name, counting UEs from one.
pub(crate) fn ue_metric(prefix: &str, ue: usize, suffix: &str) -> String {
    if suffix.is_empty() {
        format!("{prefix}_ue{}", ue + 1)
    } else {
        format!("{prefix}_ue{}_{suffix}", ue + 1)
    }
}
