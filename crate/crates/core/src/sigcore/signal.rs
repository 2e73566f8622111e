use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sigcore::power;

/// Real RF-rate waveform, amplitudes in volts at a 50-ohm reference plane.
#[derive(Debug, Clone, PartialEq)]
pub struct PassbandSignal {
    samples: Vec<f64>,
    rate: f64,
}

/// Complex baseband waveform. `center_frequency` is the carrier it was mixed
/// down from, or 0 for native baseband.
#[derive(Debug, Clone, PartialEq)]
pub struct BasebandSignal {
    samples: Vec<Complex64>,
    rate: f64,
    center_frequency: f64,
}

/// Two-level waveform at the fronthaul rate. Every sample is exactly -1 or +1.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryStream {
    samples: Vec<i8>,
    rate: f64,
}

fn check_rate(rate: f64) -> Result<()> {
    if !(rate.is_finite() && rate > 0.0) {
        return Err(Error::param(
            "rate",
            format!("must be finite and > 0, got {rate}"),
        ));
    }
    Ok(())
}

impl PassbandSignal {
    pub fn new(samples: Vec<f64>, rate: f64) -> Result<Self> {
        check_rate(rate)?;
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::param(
                "samples",
                format!("non-finite value at index {i}"),
            ));
        }
        Ok(Self { samples, rate })
    }

    pub fn zeros(len: usize, rate: f64) -> Result<Self> {
        Self::new(vec![0.0; len], rate)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.rate
    }

    /// Mean power in dBm into 50 ohm. `-inf` for an all-zero buffer.
    pub fn power_dbm(&self) -> f64 {
        power::real_power_dbm(&self.samples)
    }

    /// Applies a linear gain in dB.
    pub fn amplify(mut self, gain_db: f64) -> Self {
        let g = power::db_to_amplitude(gain_db);
        self.samples.iter_mut().for_each(|v| *v *= g);
        self
    }

    /// Rescales to the given mean power. Fails on an all-zero buffer.
    pub fn with_power_dbm(mut self, dbm: f64) -> Result<Self> {
        let p = self.power_dbm();
        if !p.is_finite() {
            return Err(Error::param("signal", "cannot rescale a zero-power signal"));
        }
        let g = power::db_to_amplitude(dbm - p);
        self.samples.iter_mut().for_each(|v| *v *= g);
        Ok(self)
    }

    pub(crate) fn from_raw(samples: Vec<f64>, rate: f64) -> Self {
        debug_assert!(rate > 0.0);
        Self { samples, rate }
    }
}

impl BasebandSignal {
    pub fn new(samples: Vec<Complex64>, rate: f64, center_frequency: f64) -> Result<Self> {
        check_rate(rate)?;
        if let Some(i) = samples
            .iter()
            .position(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::param(
                "samples",
                format!("non-finite value at index {i}"),
            ));
        }
        if !center_frequency.is_finite() {
            return Err(Error::param("center_frequency", "must be finite"));
        }
        Ok(Self {
            samples,
            rate,
            center_frequency,
        })
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn center_frequency(&self) -> f64 {
        self.center_frequency
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Mean power in dBm, using the passband-equivalent convention
    /// `P = mean(|x|^2) / 50`.
    pub fn power_dbm(&self) -> f64 {
        power::complex_power_dbm(&self.samples)
    }

    pub fn scale(mut self, g: Complex64) -> Self {
        self.samples.iter_mut().for_each(|v| *v *= g);
        self
    }

    pub fn with_power_dbm(self, dbm: f64) -> Result<Self> {
        let p = self.power_dbm();
        if !p.is_finite() {
            return Err(Error::param("signal", "cannot rescale a zero-power signal"));
        }
        Ok(self.scale(Complex64::new(power::db_to_amplitude(dbm - p), 0.0)))
    }

    pub(crate) fn from_raw(samples: Vec<Complex64>, rate: f64, center_frequency: f64) -> Self {
        debug_assert!(rate > 0.0);
        Self {
            samples,
            rate,
            center_frequency,
        }
    }
}

impl BinaryStream {
    /// Builds a stream from values that must be exactly -1 or +1.
    pub fn new(samples: Vec<i8>, rate: f64) -> Result<Self> {
        check_rate(rate)?;
        if let Some(i) = samples.iter().position(|&s| s != 1 && s != -1) {
            return Err(Error::param(
                "samples",
                format!("value {} at index {i} is not +-1", samples[i]),
            ));
        }
        Ok(Self { samples, rate })
    }

    /// Sign of each value with ties (exact zero) mapped to +1.
    pub fn from_signs(values: &[f64], rate: f64) -> Result<Self> {
        check_rate(rate)?;
        let samples = values
            .iter()
            .map(|&v| if v >= 0.0 { 1 } else { -1 })
            .collect();
        Ok(Self { samples, rate })
    }

    pub fn samples(&self) -> &[i8] {
        &self.samples
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Electrical waveform of the stream with levels `+-amplitude` volts.
    pub fn to_passband(&self, amplitude: f64) -> PassbandSignal {
        PassbandSignal::from_raw(
            self.samples.iter().map(|&s| s as f64 * amplitude).collect(),
            self.rate,
        )
    }

    pub(crate) fn from_raw(samples: Vec<i8>, rate: f64) -> Self {
        debug_assert!(samples.iter().all(|&s| s == 1 || s == -1));
        Self { samples, rate }
    }
}
