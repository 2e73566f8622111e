//! A complete TDD D-MIMO round trip through the experiment runner.
//!
//! Three RRHs serve two UEs. Uplink pilots give the uplink channel, the
//! RRHs sound each other for reciprocity calibration, and the CU precodes
//! the downlink three ways: with the true downlink channel, with the raw
//! uplink estimate and with the calibrated uplink estimate. The first run
//! uses ideal links to isolate the transceiver mismatch; the second runs
//! full 1-bit chains in both directions.
//!
//! ```bash
//! cargo run --release --example dmimo_loop
//! ```

use rofsim::bench::{find_experiment, run_experiment, RunOptions, ScenarioConfig};
use rofsim::error::Result;

fn main() -> Result<()> {
    let ideal = ScenarioConfig::from_toml_str(include_str!("../configs/dmimo_ideal.toml"))?;
    let mut hardware = ScenarioConfig::from_toml_str(include_str!("../configs/dmimo.toml"))?;
    hardware.scenario.data_symbols = 500;

    for (label, cfg, repeats) in [("ideal links", &ideal, 3), ("1-bit chains", &hardware, 1)] {
        let exp = find_experiment("dmimo-downlink")?;
        let opts = RunOptions {
            seed: 2024,
            repeats: Some(repeats),
            workers: None,
        };
        let result = run_experiment(exp.as_ref(), cfg, &opts)?;
        println!("{label}, {repeats} channel draws:");
        for m in result.summary(0) {
            println!("  {:<14} {:>8.2} % (std {:.2})", m.name, m.mean, m.std);
        }
    }
    Ok(())
}
