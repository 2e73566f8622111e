//! Welch power spectral density estimation with a Hann window and density
//! scaling (units of V^2/Hz, so the integral over frequency is the variance).

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::sigcore::signal::{BasebandSignal, PassbandSignal};

#[derive(Debug, Clone, PartialEq)]
pub struct Psd {
    /// Bin frequencies in Hz: `[0, rate/2]` for real input, `[-rate/2, rate/2)`
    /// ascending for complex input.
    pub freqs: Vec<f64>,
    pub values: Vec<f64>,
    pub resolution: f64,
}

impl Psd {
    /// Integral of the density over `[f1, f2]`.
    pub fn band_power(&self, f1: f64, f2: f64) -> f64 {
        self.freqs
            .iter()
            .zip(&self.values)
            .filter(|(f, _)| **f >= f1 && **f <= f2)
            .map(|(_, v)| v * self.resolution)
            .sum()
    }

    /// Integral over all bins.
    pub fn total_power(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.resolution
    }

    /// Frequency of the largest bin.
    pub fn peak_frequency(&self) -> f64 {
        let (i, _) = self
            .values
            .iter()
            .enumerate()
            .fold(
                (0, f64::MIN),
                |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc },
            );
        self.freqs[i]
    }
}

fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect()
}

fn averaged_periodogram(x: &[Complex64], seg: usize, overlap: f64) -> Result<Vec<f64>> {
    if seg == 0 || seg > x.len() {
        return Err(Error::param(
            "segment_length",
            format!("must be in 1..={}, got {seg}", x.len()),
        ));
    }
    if !(0.0..1.0).contains(&overlap) {
        return Err(Error::param(
            "overlap",
            format!("must be in [0, 1), got {overlap}"),
        ));
    }
    let step = ((seg as f64 * (1.0 - overlap)).round() as usize).max(1);
    let w = hann(seg);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(seg);
    let mut acc = vec![0.0; seg];
    let mut count = 0usize;
    let mut buf = vec![Complex64::new(0.0, 0.0); seg];
    let mut start = 0;
    while start + seg <= x.len() {
        for i in 0..seg {
            buf[i] = x[start + i] * w[i];
        }
        fft.process(&mut buf);
        acc.iter_mut()
            .zip(&buf)
            .for_each(|(a, b)| *a += b.norm_sqr());
        count += 1;
        start += step;
    }
    let u: f64 = w.iter().map(|v| v * v).sum();
    acc.iter_mut().for_each(|a| *a /= count as f64 * u);
    Ok(acc)
}

/// One-sided Welch PSD of a real buffer sampled at `rate`.
pub fn welch_real(x: &[f64], rate: f64, segment_length: usize, overlap: f64) -> Result<Psd> {
    let xc: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let p = averaged_periodogram(&xc, segment_length, overlap)?;
    let n = segment_length;
    let bins = n / 2 + 1;
    let mut values: Vec<f64> = p[..bins].iter().map(|v| v / rate).collect();
    for (k, v) in values.iter_mut().enumerate() {
        let nyquist = n % 2 == 0 && k == n / 2;
        if k != 0 && !nyquist {
            *v *= 2.0;
        }
    }
    let res = rate / n as f64;
    Ok(Psd {
        freqs: (0..bins).map(|k| k as f64 * res).collect(),
        values,
        resolution: res,
    })
}

/// Two-sided Welch PSD of a complex buffer, frequencies ascending.
pub fn welch_complex(
    x: &[Complex64],
    rate: f64,
    segment_length: usize,
    overlap: f64,
) -> Result<Psd> {
    let p = averaged_periodogram(x, segment_length, overlap)?;
    let n = segment_length;
    let res = rate / n as f64;
    let half = n / 2;
    let mut freqs = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let k = (i + n - half) % n;
        let f = if k >= n.div_ceil(2) {
            k as f64 - n as f64
        } else {
            k as f64
        };
        freqs.push(f * res);
        values.push(p[k] / rate);
    }
    Ok(Psd {
        freqs,
        values,
        resolution: res,
    })
}

/// Welch PSD of a passband waveform (one-sided).
pub fn welch_psd(signal: &PassbandSignal, segment_length: usize, overlap: f64) -> Result<Psd> {
    welch_real(signal.samples(), signal.rate(), segment_length, overlap)
}

/// Welch PSD of a baseband waveform (two-sided).
pub fn welch_psd_baseband(
    signal: &BasebandSignal,
    segment_length: usize,
    overlap: f64,
) -> Result<Psd> {
    welch_complex(signal.samples(), signal.rate(), segment_length, overlap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn white_noise_integrates_to_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let sigma = 0.3;
        let x: Vec<f64> = (0..1 << 16)
            .map(|_| {
                sigma * {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    z
                }
            })
            .collect();
        let psd = welch_real(&x, 1e6, 1024, 0.5).unwrap();
        let total = psd.total_power();
        assert!((total / (sigma * sigma) - 1.0).abs() < 0.05, "{total}");
    }

    #[test]
    fn tone_peaks_at_its_frequency() {
        let rate = 1000.0;
        let x: Vec<f64> = (0..8192)
            .map(|n| (2.0 * PI * 125.0 * n as f64 / rate).sin())
            .collect();
        let psd = welch_real(&x, rate, 512, 0.5).unwrap();
        assert!((psd.peak_frequency() - 125.0).abs() < psd.resolution);
    }

    #[test]
    fn complex_tone_sign_resolved() {
        let rate = 1000.0;
        let x: Vec<Complex64> = (0..4096)
            .map(|n| Complex64::from_polar(1.0, -2.0 * PI * 200.0 * n as f64 / rate))
            .collect();
        let psd = welch_complex(&x, rate, 256, 0.5).unwrap();
        assert!((psd.peak_frequency() + 200.0).abs() < psd.resolution);
        assert!((psd.total_power() - 1.0).abs() < 0.05);
    }

    #[test]
    fn long_segment_rejected() {
        assert!(welch_real(&[0.0; 10], 1.0, 11, 0.5).is_err());
    }
}
