//! 1-bit sigma-delta modulation: NTF synthesis, loop simulation and in-band
//! quality metrics. Used both for the bandpass downlink encoder and for the
//! lowpass dither encoder.

pub mod metrics;
pub mod modulator;
pub mod ntf;

pub use metrics::{inband_sndr, inband_sndr_reference, inband_sndr_tone};
pub use modulator::{sdm_encode, SdmLoop, SdmState};
pub use ntf::{osr, synthesize_ntf, Ntf, SdmDesign, Section};

/// Mean-square of a full-scale sine; 0 dBFS.
pub const FULL_SCALE_SINE_POWER: f64 = 0.5;

/// Scales `x` so its mean square is `drive_dbfs` relative to a full-scale
/// sine. Returns the applied gain.
pub fn normalize_drive(x: &mut [f64], drive_dbfs: f64) -> f64 {
    let ms = crate::sigcore::power::mean_square(x);
    if ms <= 0.0 {
        return 1.0;
    }
    let target = FULL_SCALE_SINE_POWER * 10f64.powf(drive_dbfs / 10.0);
    let g = (target / ms).sqrt();
    x.iter_mut().for_each(|v| *v *= g);
    g
}
