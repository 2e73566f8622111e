//! Optical fronthaul transport of a binary waveform.
//!
//! An ideal link delivers the bits unchanged. The impaired link models the
//! finite rise/fall time of the optical transceivers: the two-level waveform
//! is held on a grid `M` times finer than the bit rate, smoothed by a
//! Gaussian edge kernel and re-thresholded at the CU sampling instants. Runs
//! of bits settle fully; isolated pulses shorter than the edge time are
//! attenuated and can fall below the decision threshold.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sigcore::signal::BinaryStream;

/// 10-90 % rise time of a Gaussian-smoothed step in units of sigma:
/// `2 * Phi^-1(0.9)`.
pub const RISE_TIME_PER_SIGMA: f64 = 2.563_103_131_089_201;

/// Kernel half-width in sigmas.
const KERNEL_SIGMAS: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FronthaulImpairment {
    pub enabled: bool,
    /// 10-90 % rise and fall time, seconds.
    pub rise_fall_time: f64,
    /// RMS jitter of the CU sampling instants, seconds.
    pub sampling_jitter_rms: f64,
    /// Internal oversampling factor of the edge model.
    pub oversampling: usize,
    /// Smoothed levels with magnitude below this are resolved by a fair
    /// coin (metastable sampler). Zero keeps the sampler deterministic.
    pub metastable_band: f64,
}

impl Default for FronthaulImpairment {
    fn default() -> Self {
        Self {
            enabled: false,
            rise_fall_time: 54e-12,
            sampling_jitter_rms: 0.0,
            oversampling: 8,
            metastable_band: 0.0,
        }
    }
}

impl FronthaulImpairment {
    /// Impaired link with the default 54 ps edges.
    pub fn with_edges() -> Self {
        Self {
            enabled: true,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.enabled {
            return Ok(());
        }
        if self.oversampling < 4 {
            return Err(Error::param(
                "fronthaul.oversampling",
                format!(
                    "must be >= 4 when the impairment is enabled, got {}",
                    self.oversampling
                ),
            ));
        }
        if !(self.rise_fall_time > 0.0) {
            return Err(Error::param("fronthaul.rise_fall_time", "must be > 0"));
        }
        if !(self.sampling_jitter_rms >= 0.0) {
            return Err(Error::param(
                "fronthaul.sampling_jitter_rms",
                "must be >= 0",
            ));
        }
        if !(self.metastable_band >= 0.0) {
            return Err(Error::param("fronthaul.metastable_band", "must be >= 0"));
        }
        Ok(())
    }
}

/// Unit-sum Gaussian kernel whose step response has the given 10-90 % rise
/// time at `fine_rate`. Symmetric, odd length.
pub fn edge_kernel(fine_rate: f64, rise_fall_time: f64) -> Vec<f64> {
    let sigma = rise_fall_time / RISE_TIME_PER_SIGMA * fine_rate;
    let half = (KERNEL_SIGMAS * sigma).ceil().max(1.0) as i64;
    let mut k: Vec<f64> = (-half..=half)
        .map(|j| (-0.5 * (j as f64 / sigma).powi(2)).exp())
        .collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// Smooths a fine-grid level sequence with the edge kernel. Same length;
/// the ends are extended with the first/last level.
pub fn smooth_levels(levels: &[f64], fine_rate: f64, rise_fall_time: f64) -> Vec<f64> {
    let k = edge_kernel(fine_rate, rise_fall_time);
    let n = levels.len() as i64;
    (0..n)
        .map(|i| smoothed_at(&k, i, n, |j| levels[j as usize]))
        .collect()
}

#[inline]
fn smoothed_at(kernel: &[f64], i: i64, n: i64, level: impl Fn(i64) -> f64) -> f64 {
    let half = (kernel.len() / 2) as i64;
    kernel
        .iter()
        .enumerate()
        .map(|(t, &w)| w * level((i + half - t as i64).clamp(0, n - 1)))
        .sum()
}

/// Carries `stream` over the fiber and resamples it with the CU's 1-bit
/// sampler at `fs_cu`.
///
/// Disabled: identity (the rate must then equal `fs_cu`). Enabled: bit `n`
/// occupies fine samples `[nM, (n+1)M)`, whose centres sit at
/// `(k + 1/2) / (M fs)`. Output sample `m` is taken at `(m + 1/2) / fs_cu`
/// plus Gaussian jitter, linearly interpolating the smoothed levels.
pub fn fronthaul_transport<R: Rng + ?Sized>(
    stream: &BinaryStream,
    imp: &FronthaulImpairment,
    fs_cu: f64,
    rng: &mut R,
) -> Result<BinaryStream> {
    imp.validate()?;
    if !imp.enabled {
        if fs_cu != stream.rate() {
            return Err(Error::param(
                "fs_cu",
                format!(
                    "an ideal link needs fs_cu equal to the stream rate {} Hz",
                    stream.rate()
                ),
            ));
        }
        return Ok(stream.clone());
    }
    if !(fs_cu > 0.0 && fs_cu.is_finite()) {
        return Err(Error::param("fs_cu", "must be finite and > 0"));
    }
    let m = imp.oversampling as i64;
    let fs = stream.rate();
    let fine_rate = fs * m as f64;
    let kernel = edge_kernel(fine_rate, imp.rise_fall_time);
    let bits = stream.samples();
    let n_fine = bits.len() as i64 * m;
    let n_out = (bits.len() as f64 * fs_cu / fs).floor() as usize;
    let level = |j: i64| bits[(j / m) as usize] as f64;

    let mut out = Vec::with_capacity(n_out);
    for i in 0..n_out {
        let mut t = (i as f64 + 0.5) / fs_cu;
        if imp.sampling_jitter_rms > 0.0 {
            let z: f64 = StandardNormal.sample(rng);
            t += imp.sampling_jitter_rms * z;
        }
        let u = (t * fine_rate - 0.5).clamp(0.0, (n_fine - 1) as f64);
        let k0 = u.floor() as i64;
        let frac = u - k0 as f64;
        let mut y = smoothed_at(&kernel, k0, n_fine, level);
        if frac > 0.0 && k0 + 1 < n_fine {
            let y1 = smoothed_at(&kernel, k0 + 1, n_fine, level);
            y += frac * (y1 - y);
        }
        let b = if y.abs() < imp.metastable_band {
            if rng.random::<bool>() {
                1
            } else {
                -1
            }
        } else if y >= 0.0 {
            1
        } else {
            -1
        };
        out.push(b);
    }
    Ok(BinaryStream::from_raw(out, fs_cu))
}
