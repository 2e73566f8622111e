//! Over-the-air reciprocity calibration between radio heads.
//!
//! Three RRHs with random transmit and receive gains sound each other in
//! turn. The CU estimates the calibration diagonal from the sounding
//! matrix alone and compares it with the true `t / r` ratios, first
//! without noise and then with receiver noise.
//!
//! ```bash
//! cargo run --release --example reciprocity_calibration
//! ```

use rofsim::calibration::{calibration_quality, estimate_c, simulate_sounding, CalibrationOptions};
use rofsim::channel::{draw_channel, inter_rrh_matrix, ChannelModel, GainModel, Geometry, NoiseConfig};
use rofsim::error::Result;
use rofsim::modem::zadoff_chu;

fn main() -> Result<()> {
    let geometry = Geometry::lab();
    let inter = inter_rrh_matrix(&geometry.rrh, geometry.wavelength)?;
    let ch = draw_channel(&ChannelModel::Los(geometry.clone()), 3, 2, GainModel::Random { spread_db: 3.0 }, 17)?;
    let pilot = zadoff_chu(25, 64)?;

    let truth = ch.calibration_diagonal();
    println!("true t/r per RRH (relative to RRH 1):");
    for (i, c) in truth.iter().enumerate() {
        let rel = c / truth[0];
        println!("  RRH {}: {:>6.2} dB {:>8.2} deg", i + 1, 20.0 * rel.norm().log10(), rel.arg().to_degrees());
    }

    for noise in [None, Some(-60.0), Some(-40.0)] {
        let cfg = match noise {
            Some(dbm) => NoiseConfig::new(dbm, 4),
            None => NoiseConfig::none(),
        };
        let y = simulate_sounding(&ch, &inter, &pilot, &cfg)?;
        let est = estimate_c(&y, &CalibrationOptions::default())?;
        let q = calibration_quality(&ch, &est.matrix)?;
        let label = noise.map_or("noiseless".to_string(), |n| format!("noise {n} dBm"));
        println!(
            "{label:>16}: max phase error {:.2e} deg, max magnitude error {:.2e} dB, {} iterations",
            q.max_phase_error_deg, q.max_magnitude_error_db, est.iterations
        );
    }
    Ok(())
}
