//! The dithered 1-bit uplink of one RRH.
//!
//! A 10 MBd 16QAM burst at -30 dBm passes the RRH front end (band select,
//! AGC, amplifiers, thermal noise), is compared against the reconstructed
//! triangle dither and crosses the fiber as a 10 GS/s binary waveform. The
//! CU filters the bits back to baseband. Sweeping the dither power shows
//! why the dither is there.
//!
//! ```bash
//! cargo run --release --example dithered_uplink
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rofsim::bench::link::{at_power, preamble, sc_burst, sc_symbols_sync, sc_uplink, score_burst};
use rofsim::bench::ScenarioConfig;
use rofsim::error::Result;

fn main() -> Result<()> {
    let mut cfg = ScenarioConfig::default();
    cfg.scenario.data_symbols = 1000;
    cfg.dither.frequency = 17e6;
    let wf = cfg.waveform.rrc()?;
    let pre = preamble(0, cfg.scenario.preamble_length)?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let burst = sc_burst(&mut rng, &wf, &pre, cfg.scenario.data_symbols)?;
    let bb = at_power(burst.signal.clone(), cfg.scenario.input_power_dbm)?;

    println!("{} MBd {} at {} dBm, 1-bit sampling at {} GS/s", wf.symbol_rate / 1e6, wf.scheme, cfg.scenario.input_power_dbm, cfg.scenario.sample_rate / 1e9);
    for dither_dbm in [-30.0, -12.0, -6.0, -4.5, -2.0] {
        cfg.dither.power_dbm = dither_dbm;
        let y = sc_uplink(&cfg, &wf, &bb, 21)?;
        let symbols = sc_symbols_sync(&y, &wf, &pre, burst.symbols.len())?;
        let (evm, _) = score_burst(&symbols, &burst.symbols, burst.preamble_length, 0)?;
        let (evm_eq, _) = score_burst(&symbols, &burst.symbols, burst.preamble_length, 10)?;
        println!("dither {dither_dbm:>5.1} dBm: EVM {evm:>6.2}%  (10-tap equalizer {evm_eq:>6.2}%)");
    }
    Ok(())
}
