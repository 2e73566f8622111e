//! In-band signal-to-noise-and-distortion of a binary stream.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::sigcore::signal::BinaryStream;

/// Bins on either side of the tone bin counted as signal (Hann main lobe
/// plus margin).
pub const SIGNAL_HALF_WIDTH_BINS: usize = 3;

/// Hann-windowed power spectrum `|X_k|^2` of a real buffer, bins `0..=N/2`.
pub fn hann_spectrum(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut buf: Vec<Complex64> = x
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            Complex64::new(
                v * (0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos()),
                0.0,
            )
        })
        .collect();
    FftPlanner::<f64>::new()
        .plan_fft_forward(n)
        .process(&mut buf);
    buf[..=n / 2].iter().map(|v| v.norm_sqr()).collect()
}

/// SNDR in dB of a tone at `tone_freq` within `band = [f1, f2]` (Hz).
///
/// Signal power is the sum of the bins within
/// [`SIGNAL_HALF_WIDTH_BINS`] of the tone; everything else in the band is
/// noise plus distortion.
pub fn inband_sndr_tone(x: &[f64], rate: f64, band: (f64, f64), tone_freq: f64) -> Result<f64> {
    let (f1, f2) = band;
    if !(f1 >= 0.0 && f2 > f1 && f2 <= rate / 2.0) {
        return Err(Error::param(
            "band",
            format!("[{f1}, {f2}] Hz must lie within [0, {}] Hz", rate / 2.0),
        ));
    }
    if !(tone_freq >= f1 && tone_freq <= f2) {
        return Err(Error::param(
            "band",
            format!("signal at {tone_freq} Hz does not overlap the band [{f1}, {f2}] Hz"),
        ));
    }
    if x.len() < 64 {
        return Err(Error::param(
            "stream",
            "too short for a spectral measurement",
        ));
    }
    let spec = hann_spectrum(x);
    let res = rate / x.len() as f64;
    let k_tone = (tone_freq / res).round() as usize;
    let k1 = (f1 / res).ceil() as usize;
    let k2 = ((f2 / res).floor() as usize).min(spec.len() - 1);
    let (mut sig, mut noise) = (0.0, 0.0);
    for (k, &p) in spec.iter().enumerate().take(k2 + 1).skip(k1) {
        if k.abs_diff(k_tone) <= SIGNAL_HALF_WIDTH_BINS {
            sig += p;
        } else {
            noise += p;
        }
    }
    if noise <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (sig / noise).log10())
}

/// [`inband_sndr_tone`] on a binary stream.
pub fn inband_sndr(stream: &BinaryStream, band: (f64, f64), tone_freq: f64) -> Result<f64> {
    let x: Vec<f64> = stream.samples().iter().map(|&v| v as f64).collect();
    inband_sndr_tone(&x, stream.rate(), band, tone_freq)
}

/// SNDR against an arbitrary reference waveform: the stream is projected on
/// the reference within the band (least-squares complex gain per bin group is
/// avoided; a single real gain is fitted in the frequency domain) and the
/// residual in-band power is the noise.
pub fn inband_sndr_reference(
    stream: &BinaryStream,
    band: (f64, f64),
    reference: &[f64],
) -> Result<f64> {
    let (f1, f2) = band;
    let rate = stream.rate();
    if !(f1 >= 0.0 && f2 > f1 && f2 <= rate / 2.0) {
        return Err(Error::param(
            "band",
            format!("[{f1}, {f2}] Hz must lie within [0, {}] Hz", rate / 2.0),
        ));
    }
    if reference.len() != stream.len() {
        return Err(Error::DimensionMismatch(format!(
            "reference has {} samples, stream {}",
            reference.len(),
            stream.len()
        )));
    }
    let n = stream.len();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let mut s: Vec<Complex64> = stream
        .samples()
        .iter()
        .map(|&v| Complex64::new(v as f64, 0.0))
        .collect();
    let mut r: Vec<Complex64> = reference.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft.process(&mut s);
    fft.process(&mut r);
    let res = rate / n as f64;
    let k1 = (f1 / res).ceil() as usize;
    let k2 = ((f2 / res).floor() as usize).min(n / 2);
    let (mut num, mut den) = (Complex64::new(0.0, 0.0), 0.0);
    for k in k1..=k2 {
        num += s[k] * r[k].conj();
        den += r[k].norm_sqr();
    }
    if den <= 0.0 {
        return Err(Error::param("band", "reference has no power in the band"));
    }
    let g = num / den;
    let (mut ps, mut pn) = (0.0, 0.0);
    for k in k1..=k2 {
        ps += (g * r[k]).norm_sqr();
        pn += (s[k] - g * r[k]).norm_sqr();
    }
    Ok(10.0 * (ps / pn).log10())
}
