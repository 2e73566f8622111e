//! Bandpass sigma-delta encoding for the 1-bit downlink.
//!
//! Synthesizes the fourth-order NTF around 2.35 GHz, shows its shape, then
//! sends a 10 MBd 16QAM burst through the CU encoder, the fiber and the RRH
//! transmitter at several drive levels and reports the EVM at the UE, once
//! with a noiseless UE receiver (the encoder alone) and once with the UE's
//! thermal noise.
//!
//! ```bash
//! cargo run --release --example sigma_delta_downlink
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rofsim::bench::link::{downlink_transmit, preamble, sc_burst, sc_half_band, sc_symbols_fixed, score_burst, ue_receive};
use rofsim::bench::ScenarioConfig;
use rofsim::error::Result;
use rofsim::sigma_delta::synthesize_ntf;

fn main() -> Result<()> {
    let mut cfg = ScenarioConfig::default();
    cfg.scenario.data_symbols = 1000;
    let fc = cfg.scenario.carrier_frequency;
    let fs = cfg.scenario.sample_rate;

    let design = cfg.sdm.design(fc, fs)?;
    let ntf = synthesize_ntf(&design)?;
    println!("order {} bandpass, f0/fs {:.3}, OSR {:.0}, max |NTF| {:.3}", design.order, design.center_frequency_ratio, design.osr, ntf.max_gain());
    for df in [0.0, 10e6, 25e6, 50e6, 100e6, 500e6] {
        println!("  |NTF| at f0 + {:>5.0} MHz: {:>7.1} dB", df / 1e6, ntf.gain_db((fc + df) / fs));
    }

    let wf = cfg.waveform.rrc()?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let burst = sc_burst(&mut rng, &wf, &preamble(0, cfg.scenario.preamble_length)?, cfg.scenario.data_symbols)?;
    for drive in [-24.0, -18.0, -12.0, -6.0] {
        cfg.sdm.drive_dbfs = drive;
        let tx = downlink_transmit(&cfg, std::slice::from_ref(&burst.signal), sc_half_band(&wf), 11)?;
        let mut evm = Vec::new();
        for noisy in [false, true] {
            cfg.frontend.noise_enabled = noisy;
            let rx = ue_receive(&cfg, &tx[0], 12)?;
            let symbols = sc_symbols_fixed(&rx, &wf, burst.symbols.len())?;
            evm.push(score_burst(&symbols, &burst.symbols, burst.preamble_length, 0)?.0);
        }
        println!("drive {drive:>5.1} dBFS: EVM {:.2}% noiseless UE, {:.2}% with UE noise", evm[0], evm[1]);
    }
    Ok(())
}
