//! Point-to-point downlink through the sigma-delta encoder.

use super::{Experiment, PointOutcome};
use crate::bench::config::{ScenarioConfig, SweepAxis};
use crate::bench::link::{
    downlink_transmit, preamble, sc_burst, sc_half_band, sc_symbols_sync, score_burst, ue_receive,
    SeedStream,
};
use crate::error::Result;

/// One RRH serving one UE.
pub struct DownlinkP2p;

impl Experiment for DownlinkP2p {
    fn name(&self) -> &'static str {
        "downlink-p2p"
    }

    fn description(&self) -> &'static str {
        "downlink EVM through sigma-delta encoding, fiber and the RRH transmitter, versus encoder drive"
    }

    fn default_axes(&self) -> Vec<SweepAxis> {
        vec![SweepAxis::new(
            "sdm.drive_dbfs",
            &[-18.0, -15.0, -12.0, -9.0, -6.0],
        )]
    }

    fn run_point(&self, cfg: &ScenarioConfig, seed: u64) -> Result<PointOutcome> {
        let wf = cfg.waveform.rrc()?;
        let mut seeds = SeedStream::new(seed);
        let pre = preamble(0, cfg.preamble_length())?;
        let burst = sc_burst(&mut seeds.rng(), &wf, &pre, cfg.scenario.data_symbols)?;
        let tx = downlink_transmit(
            cfg,
            std::slice::from_ref(&burst.signal),
            sc_half_band(&wf),
            seeds.next(),
        )?;
        let y = ue_receive(cfg, &tx[0], seeds.next())?;
        let rx = sc_symbols_sync(&y, &wf, &pre, burst.symbols.len())?;
        let (evm, data) = score_burst(
            &rx,
            &burst.symbols,
            burst.preamble_length,
            cfg.scenario.equalizer_taps,
        )?;
        Ok(PointOutcome::default()
            .metric("evm", evm)
            .with_constellation(data))
    }
}
