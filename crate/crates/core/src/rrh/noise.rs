//! Band-limited Gaussian noise for real RF waveforms.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::sigcore::power::dbm_to_watts;
use crate::sigcore::power::REFERENCE_OHMS;

/// `len` samples of real Gaussian noise at `rate` whose spectrum is flat
/// over `band = (low, high)` Hz and zero elsewhere, with expected total
/// power `power_dbm` (50 ohm).
///
/// A complex white sequence is masked in the frequency domain on both the
/// positive and negative band images; the real part of its inverse
/// transform is the noise. The variance is set from the kept bandwidth
/// fraction, not renormalized from the draw, so the power is exact in
/// expectation.
pub fn band_limited_noise<R: Rng + ?Sized>(
    rng: &mut R,
    len: usize,
    rate: f64,
    band: (f64, f64),
    power_dbm: f64,
) -> Result<Vec<f64>> {
    let (lo, hi) = band;
    if !(lo >= 0.0 && hi > lo && hi <= rate / 2.0) {
        return Err(Error::param(
            "band",
            format!("[{lo}, {hi}] Hz must lie within [0, {}] Hz", rate / 2.0),
        ));
    }
    if len == 0 {
        return Ok(Vec::new());
    }
    let nfft = len.next_power_of_two();
    let mut buf: Vec<Complex64> = (0..nfft)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im)
        })
        .collect();
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(nfft).process(&mut buf);
    let res = rate / nfft as f64;
    let mut kept = 0usize;
    for (k, v) in buf.iter_mut().enumerate() {
        let f = if k <= nfft / 2 {
            k as f64 * res
        } else {
            (nfft - k) as f64 * res
        };
        if f >= lo && f <= hi {
            kept += 1;
        } else {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    if kept == 0 {
        return Err(Error::param("band", "narrower than one frequency bin"));
    }
    planner.plan_fft_inverse(nfft).process(&mut buf);
    // per-component variance of the draw is 1; after the mask and an
    // unnormalized inverse FFT each real sample has variance kept * nfft
    let target = dbm_to_watts(power_dbm) * REFERENCE_OHMS;
    let scale = (target / (kept as f64 * nfft as f64)).sqrt();
    Ok(buf[..len].iter().map(|v| v.re * scale).collect())
}
