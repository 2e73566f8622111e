//! Two UEs received by one RRH, either on the same carrier or on adjacent
//! carriers.

use num_complex::Complex64;

use super::{ue_metric, Experiment, PointOutcome};
use crate::bench::config::{ScenarioConfig, SweepAxis};
use crate::bench::evm::compute_evm;
use crate::bench::link::{
    cu_select, preamble, sc_burst, sc_half_band, sc_symbols_sync, uplink_capture, SeedStream,
};
use crate::channel::add_interference;
use crate::error::Result;
use crate::sigcore::mix::upconvert;
use crate::sigcore::signal::BasebandSignal;

/// Co-channel interferer at `interference.sir_db` below the desired UE.
pub struct InbandInterference;

impl Experiment for InbandInterference {
    fn name(&self) -> &'static str {
        "inband-interference"
    }

    fn description(&self) -> &'static str {
        "EVM of a UE against a co-channel interferer, with the unquantized noiseless reference"
    }

    fn default_axes(&self) -> Vec<SweepAxis> {
        let sir: Vec<f64> = (0..9).map(|k| 5.0 * k as f64).collect();
        vec![SweepAxis::new("interference.sir_db", &sir)]
    }

    fn run_point(&self, cfg: &ScenarioConfig, seed: u64) -> Result<PointOutcome> {
        let wf = cfg.waveform.rrc()?;
        let n_pre = cfg.preamble_length();
        let mut seeds = SeedStream::new(seed);
        let pre1 = preamble(0, n_pre)?;
        let pre2 = preamble(1, n_pre)?;
        let ue1 = sc_burst(&mut seeds.rng(), &wf, &pre1, cfg.scenario.data_symbols)?;
        let ue2 = sc_burst(&mut seeds.rng(), &wf, &pre2, cfg.scenario.data_symbols)?;
        let desired = ue1
            .signal
            .clone()
            .with_power_dbm(cfg.scenario.input_power_dbm)?;
        let sum = add_interference(&desired, &ue2.signal, cfg.interference.sir_db)?;
        let n = ue1.symbols.len();

        // interference-limited reference: no quantization, no noise
        let ideal = sc_symbols_sync(&sum, &wf, &pre1, n)?;
        let reference = compute_evm(&ideal[n_pre..], ue1.data())?;

        let fc = cfg.scenario.carrier_frequency;
        let rf = upconvert(&sum, fc, cfg.scenario.sample_rate)?;
        let cap = uplink_capture(cfg, &rf, wf.occupied_bandwidth(), seeds.next())?;
        let y = cu_select(&cap.waveform, fc, wf.sample_rate(), sc_half_band(&wf))?;
        let rx = sc_symbols_sync(&y, &wf, &pre1, n)?;
        let data = rx[n_pre..].to_vec();
        let evm = compute_evm(&data, ue1.data())?;
        Ok(PointOutcome::default()
            .metric(ue_metric("evm", 0, ""), evm)
            .metric("evm_reference", reference)
            .with_constellation(data))
    }
}

/// Two narrowband UEs on adjacent carriers; UE 2 is `interference.sir_db`
/// weaker than UE 1. Both are decoded.
pub struct OobInterference;

fn frequency_shift(x: &BasebandSignal, offset: f64) -> Result<BasebandSignal> {
    let w = 2.0 * std::f64::consts::PI * offset / x.rate();
    let samples = x
        .samples()
        .iter()
        .enumerate()
        .map(|(n, v)| v * Complex64::from_polar(1.0, w * n as f64))
        .collect();
    BasebandSignal::new(samples, x.rate(), x.center_frequency())
}

impl Experiment for OobInterference {
    fn name(&self) -> &'static str {
        "oob-interference"
    }

    fn description(&self) -> &'static str {
        "EVM of two narrowband UEs on adjacent carriers versus their power ratio"
    }

    fn default_axes(&self) -> Vec<SweepAxis> {
        vec![SweepAxis::new(
            "interference.sir_db",
            &[0.0, 5.0, 10.0, 15.0, 20.0],
        )]
    }

    fn prepare(&self, cfg: &ScenarioConfig) -> Result<ScenarioConfig> {
        let mut c = cfg.clone();
        c.waveform.symbol_rate = cfg.interference.adjacent_symbol_rate;
        Ok(c)
    }

    fn run_point(&self, cfg: &ScenarioConfig, seed: u64) -> Result<PointOutcome> {
        let wf = cfg.waveform.rrc()?;
        let n_pre = cfg.preamble_length();
        let offsets = cfg.interference.adjacent_offsets;
        let mut seeds = SeedStream::new(seed);
        let pres = [preamble(0, n_pre)?, preamble(1, n_pre)?];
        let bursts = [
            sc_burst(&mut seeds.rng(), &wf, &pres[0], cfg.scenario.data_symbols)?,
            sc_burst(&mut seeds.rng(), &wf, &pres[1], cfg.scenario.data_symbols)?,
        ];
        let p1 = cfg.scenario.input_power_dbm;
        let s1 = frequency_shift(&bursts[0].signal.clone().with_power_dbm(p1)?, offsets[0])?;
        let s2 = frequency_shift(
            &bursts[1]
                .signal
                .clone()
                .with_power_dbm(p1 - cfg.interference.sir_db)?,
            offsets[1],
        )?;
        let sum: Vec<Complex64> = s1
            .samples()
            .iter()
            .zip(s2.samples())
            .map(|(a, b)| a + b)
            .collect();
        let sum = BasebandSignal::new(sum, s1.rate(), 0.0)?;

        let fc = cfg.scenario.carrier_frequency;
        let rf = upconvert(&sum, fc, cfg.scenario.sample_rate)?;
        let occupied = (offsets[1] - offsets[0]).abs() + wf.occupied_bandwidth();
        let cap = uplink_capture(cfg, &rf, occupied, seeds.next())?;

        let mut out = PointOutcome::default();
        for (u, burst) in bursts.iter().enumerate() {
            let y = cu_select(
                &cap.waveform,
                fc + offsets[u],
                wf.sample_rate(),
                sc_half_band(&wf),
            )?;
            let rx = sc_symbols_sync(&y, &wf, &pres[u], burst.symbols.len())?;
            let data = rx[n_pre..].to_vec();
            out = out.metric(ue_metric("evm", u, ""), compute_evm(&data, burst.data())?);
            if u == 0 {
                out = out.with_constellation(data);
            }
        }
        Ok(out)
    }
}
