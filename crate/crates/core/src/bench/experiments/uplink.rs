//! Single-RRH uplink experiments.

use super::{Experiment, PointOutcome};
use crate::bench::config::{ScenarioConfig, SweepAxis};
use crate::bench::link::{
    ofdm_for_bandwidth, ofdm_frame, ofdm_receive, ofdm_uplink, preamble, sc_burst, sc_symbols_sync,
    sc_uplink, score_burst, SeedStream,
};
use crate::error::Result;

/// One single-carrier uplink burst at `scenario.input_power_dbm`, scored
/// with each equalizer length in `taps`. Returns one EVM per entry and the
/// symbols of the first.
pub(crate) fn sc_uplink_evm(
    cfg: &ScenarioConfig,
    seed: u64,
    taps: &[usize],
) -> Result<(Vec<f64>, Vec<num_complex::Complex64>)> {
    let wf = cfg.waveform.rrc()?;
    let mut seeds = SeedStream::new(seed);
    let pre = preamble(0, cfg.preamble_length())?;
    let burst = sc_burst(&mut seeds.rng(), &wf, &pre, cfg.scenario.data_symbols)?;
    let tx = burst
        .signal
        .clone()
        .with_power_dbm(cfg.scenario.input_power_dbm)?;
    let y = sc_uplink(cfg, &wf, &tx, seeds.next())?;
    let rx = sc_symbols_sync(&y, &wf, &pre, burst.symbols.len())?;
    let mut evms = Vec::with_capacity(taps.len());
    let mut first = Vec::new();
    for (k, &l) in taps.iter().enumerate() {
        let (evm, data) = score_burst(&rx, &burst.symbols, burst.preamble_length, l)?;
        if k == 0 {
            first = data;
        }
        evms.push(evm);
    }
    Ok((evms, first))
}

fn sc_point(cfg: &ScenarioConfig, seed: u64) -> Result<PointOutcome> {
    let (evm, symbols) = sc_uplink_evm(cfg, seed, &[cfg.scenario.equalizer_taps])?;
    Ok(PointOutcome::default()
        .metric("evm", evm[0])
        .with_constellation(symbols))
}

/// Receivers in the wideband experiments are taken as frequency flat.
fn flat_receiver(cfg: &ScenarioConfig) -> ScenarioConfig {
    let mut c = cfg.clone();
    c.frontend.bpf_enabled = false;
    c
}

/// EVM over a grid of dither frequency and power.
pub struct DitherSweep;

impl Experiment for DitherSweep {
    fn name(&self) -> &'static str {
        "dither-sweep"
    }

    fn description(&self) -> &'static str {
        "uplink EVM over a dither frequency x dither power grid"
    }

    fn default_axes(&self) -> Vec<SweepAxis> {
        vec![
            SweepAxis::new("dither.frequency", &[2e6, 5e6, 10e6, 17e6, 25e6, 40e6]),
            SweepAxis::new("dither.power_dbm", &[-12.0, -9.0, -6.0, -4.5, -2.0, 0.0]),
        ]
    }

    fn run_point(&self, cfg: &ScenarioConfig, seed: u64) -> Result<PointOutcome> {
        sc_point(cfg, seed)
    }
}

/// EVM against the input power at the antenna.
pub struct DynamicRange;

impl Experiment for DynamicRange {
    fn name(&self) -> &'static str {
        "dynamic-range"
    }

    fn description(&self) -> &'static str {
        "uplink EVM versus antenna input power, showing the AGC plateau"
    }

    fn default_axes(&self) -> Vec<SweepAxis> {
        let p: Vec<f64> = (0..13).map(|k| -70.0 + 5.0 * k as f64).collect();
        vec![SweepAxis::new("scenario.input_power_dbm", &p)]
    }

    fn run_point(&self, cfg: &ScenarioConfig, seed: u64) -> Result<PointOutcome> {
        sc_point(cfg, seed)
    }
}

/// Single-carrier (1 and 10 equalizer taps) and OFDM EVM against bandwidth.
pub struct Bandwidth;

impl Experiment for Bandwidth {
    fn name(&self) -> &'static str {
        "bandwidth"
    }

    fn description(&self) -> &'static str {
        "uplink EVM versus symbol rate: single carrier with 1 and 10 taps, and OFDM of equal bandwidth"
    }

    fn default_axes(&self) -> Vec<SweepAxis> {
        let rates: Vec<f64> = (1..=9).map(|k| k as f64 * 10e6).collect();
        let dither = [16e6, 22e6, 31e6, 37e6, 45e6, 61e6, 69e6, 77e6, 81e6];
        vec![SweepAxis::new("waveform.symbol_rate", &rates).linked("dither.frequency", &dither)]
    }

    fn prepare(&self, cfg: &ScenarioConfig) -> Result<ScenarioConfig> {
        Ok(flat_receiver(cfg))
    }

    fn run_point(&self, cfg: &ScenarioConfig, seed: u64) -> Result<PointOutcome> {
        let mut seeds = SeedStream::new(seed);
        let (sc, symbols) = sc_uplink_evm(cfg, seeds.next(), &[1, 10])?;

        let wf = cfg.waveform.rrc()?;
        let ocfg = ofdm_for_bandwidth(&cfg.ofdm, wf.occupied_bandwidth())?;
        let frame = ofdm_frame(
            &mut seeds.rng(),
            &ocfg,
            cfg.waveform.scheme,
            cfg.scenario.data_symbols,
            cfg.waveform.ofdm_symbols,
        )?;
        let y = ofdm_uplink(cfg, &frame, cfg.scenario.input_power_dbm, seeds.next())?;
        let (ofdm, _) = ofdm_receive(&frame, &y, cfg.waveform.delay_window)?;
        Ok(PointOutcome::default()
            .metric("evm_sc_l1", sc[0])
            .metric("evm_sc_l10", sc[1])
            .metric("evm_ofdm", ofdm)
            .with_constellation(symbols))
    }
}

/// EVM over symbol rate and the 1-bit sampling rate.
pub struct SamplingRate;

impl Experiment for SamplingRate {
    fn name(&self) -> &'static str {
        "sampling-rate"
    }

    fn description(&self) -> &'static str {
        "uplink EVM over a symbol rate x 1-bit sampling rate grid"
    }

    fn default_axes(&self) -> Vec<SweepAxis> {
        vec![
            SweepAxis::new("waveform.symbol_rate", &[10e6, 100e6])
                .linked("dither.frequency", &[17e6, 100e6]),
            SweepAxis::new("scenario.sample_rate", &[10e9, 20e9]),
        ]
    }

    fn prepare(&self, cfg: &ScenarioConfig) -> Result<ScenarioConfig> {
        Ok(flat_receiver(cfg))
    }

    fn run_point(&self, cfg: &ScenarioConfig, seed: u64) -> Result<PointOutcome> {
        sc_point(cfg, seed)
    }
}
