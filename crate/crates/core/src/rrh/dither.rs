//! Triangular dither: generated digitally at the CU, sent to the RRH as a
//! lowpass sigma-delta stream over the idle downlink fiber and rebuilt there
//! by a lowpass filter.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sigcore::filter::filter_same;
use crate::sigcore::fir::{design_fir_cached, FilterSpec};
use crate::sigcore::power::{db_to_amplitude, dbm_to_vrms};
use crate::sigcore::signal::{BinaryStream, PassbandSignal};
use crate::sigma_delta::{osr, sdm_encode, SdmDesign};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DitherShape {
    Triangular,
}

/// Dither waveform as generated at the CU.
///
/// `power_dbm` is the power of the digital waveform read as volts into
/// 50 ohm, where the sigma-delta quantizer full scale is 1 V.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DitherConfig {
    pub enabled: bool,
    pub shape: DitherShape,
    /// Fundamental frequency in Hz.
    pub frequency: f64,
    pub power_dbm: f64,
    /// Band the lowpass encoder keeps clean; matches the RRH LPF.
    pub encoder_bandwidth: f64,
    pub encoder_order: usize,
}

impl Default for DitherConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            shape: DitherShape::Triangular,
            frequency: 17e6,
            power_dbm: -4.5,
            encoder_bandwidth: 180e6,
            encoder_order: 2,
        }
    }
}

impl DitherConfig {
    pub fn new(frequency: f64, power_dbm: f64) -> Self {
        Self {
            frequency,
            power_dbm,
            ..Self::default()
        }
    }

    /// Peak amplitude `sqrt(3) * rms` of the triangle.
    pub fn amplitude(&self) -> f64 {
        3f64.sqrt() * dbm_to_vrms(self.power_dbm)
    }

    pub fn validate(&self, fs: f64) -> Result<()> {
        if !(self.frequency > 0.0 && self.frequency < fs / 4.0) {
            return Err(Error::param(
                "dither.frequency",
                format!("must be in (0, {}) Hz, got {}", fs / 4.0, self.frequency),
            ));
        }
        if !self.power_dbm.is_finite() {
            return Err(Error::param("dither.power_dbm", "must be finite"));
        }
        let a = self.amplitude();
        if a >= 1.0 {
            return Err(Error::param(
                "dither.power_dbm",
                format!(
                    "{} dBm gives a peak of {a:.3} V, beyond the encoder full scale of 1 V",
                    self.power_dbm
                ),
            ));
        }
        if self.encoder_order == 0 {
            return Err(Error::param("dither.encoder_order", "must be >= 1"));
        }
        Ok(())
    }
}

/// `len` samples of a zero-mean triangle of peak `amplitude`, starting at
/// its positive peak.
pub fn triangle_wave(frequency: f64, amplitude: f64, rate: f64, len: usize) -> Vec<f64> {
    let step = frequency / rate;
    (0..len)
        .map(|n| {
            let ph = (n as f64 * step).fract();
            amplitude * (4.0 * (ph - 0.5).abs() - 1.0)
        })
        .collect()
}

/// Generates the dither and its sigma-delta encoding at the fronthaul rate
/// `fs`.
///
/// Returns the exact triangle and the encoded binary stream (order-2 lowpass
/// loop by default, OSR set by `encoder_bandwidth`).
pub fn generate_dither(
    cfg: &DitherConfig,
    fs: f64,
    len: usize,
) -> Result<(PassbandSignal, BinaryStream)> {
    cfg.validate(fs)?;
    let tri = triangle_wave(cfg.frequency, cfg.amplitude(), fs, len);
    let design = SdmDesign::lowpass(cfg.encoder_order, osr(fs, cfg.encoder_bandwidth)?);
    let (encoded, _) = sdm_encode(&tri, fs, &design)?;
    Ok((PassbandSignal::new(tri, fs)?, encoded))
}

/// Rebuilds the dither at the RRH: LPF, then a linear gain of `gain_db`.
/// The stream levels are taken as +-1 V before the gain.
pub fn reconstruct_dither(
    encoded: &BinaryStream,
    lpf: &FilterSpec,
    gain_db: f64,
) -> Result<PassbandSignal> {
    let taps = design_fir_cached(lpf, encoded.rate())?;
    let x: Vec<f64> = encoded.samples().iter().map(|&b| b as f64).collect();
    let g = db_to_amplitude(gain_db);
    let y = filter_same(&x, taps.taps())
        .into_iter()
        .map(|v| v * g)
        .collect();
    PassbandSignal::new(y, encoded.rate())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_extremes_and_mean() {
        let t = triangle_wave(1.0, 2.0, 8.0, 16);
        assert_eq!(t[0], 2.0);
        assert_eq!(t[4], -2.0);
        assert!(t.iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn oversized_dither_rejected() {
        let cfg = DitherConfig::new(17e6, 12.0);
        assert!(generate_dither(&cfg, 10e9, 100).is_err());
        let cfg = DitherConfig::new(3e9, -4.5);
        assert!(generate_dither(&cfg, 10e9, 100).is_err());
    }
}
