//! OFDM over the 1-bit uplink.
//!
//! Picks an OFDM numerology for a target occupied bandwidth, sends one
//! pilot symbol and a block of 16QAM data symbols through the dithered
//! receiver, estimates the channel per subcarrier from the pilot and
//! equalizes.
//!
//! ```bash
//! cargo run --release --example ofdm_link
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rofsim::bench::link::{frontend_for, ofdm_for_bandwidth, ofdm_frame, ofdm_receive, ofdm_uplink};
use rofsim::bench::ScenarioConfig;
use rofsim::error::Result;
use rofsim::modem::Scheme;

fn main() -> Result<()> {
    let mut cfg = ScenarioConfig::default();
    cfg.frontend.bpf_enabled = false;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for (occupied, dither) in [(12e6, 16e6), (36e6, 31e6), (60e6, 45e6)] {
        cfg.dither.frequency = dither;
        let ofdm = ofdm_for_bandwidth(&cfg.ofdm, occupied)?;
        cfg.frontend = frontend_for(&cfg, occupied);
        let frame = ofdm_frame(&mut rng, &ofdm, Scheme::Qam16, 2000, 0)?;
        let rx = ofdm_uplink(&cfg, &frame, cfg.scenario.input_power_dbm, 31)?;
        let (evm, _) = ofdm_receive(&frame, &rx, cfg.waveform.delay_window)?;
        println!(
            "{:>4.0} MHz: FFT {:>4}, CP {:>3}, {:>4} subcarriers, {} data symbols -> EVM {evm:.2}%",
            occupied / 1e6,
            ofdm.fft_size,
            ofdm.cyclic_prefix_length,
            ofdm.occupied_subcarriers,
            frame.data.len() / ofdm.occupied_subcarriers,
        );
    }
    Ok(())
}
