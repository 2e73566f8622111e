//! FIR application: direct convolution for short filters, FFT overlap-save
//! for long ones.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::sigcore::signal::{BasebandSignal, PassbandSignal};

/// Filters at or below this length use direct convolution.
const DIRECT_MAX_TAPS: usize = 48;

/// Whether to remove the `(N - 1) / 2` sample group delay of a linear-phase
/// filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delay {
    /// Full linear convolution, length `len + N - 1`.
    Full,
    /// Drop the first `(N - 1) / 2` samples and keep `len` samples, so the
    /// output lines up with the input.
    Compensate,
}

fn trim<T: Copy>(full: Vec<T>, input_len: usize, taps: usize, delay: Delay) -> Vec<T> {
    match delay {
        Delay::Full => full,
        Delay::Compensate => {
            let d = (taps - 1) / 2;
            full[d..d + input_len].to_vec()
        }
    }
}

fn direct_complex(x: &[Complex64], h: &[Complex64]) -> Vec<Complex64> {
    let mut y = vec![Complex64::new(0.0, 0.0); x.len() + h.len() - 1];
    for (i, &xi) in x.iter().enumerate() {
        for (k, &hk) in h.iter().enumerate() {
            y[i + k] += xi * hk;
        }
    }
    y
}

/// Full linear convolution of complex sequences by overlap-save.
fn fft_convolve(x: &[Complex64], h: &[Complex64]) -> Vec<Complex64> {
    let n_taps = h.len();
    let out_len = x.len() + n_taps - 1;
    let nfft = (4 * n_taps).next_power_of_two().max(1024);
    let step = nfft - (n_taps - 1);

    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(nfft);
    let inv = planner.plan_fft_inverse(nfft);
    let mut hf = vec![Complex64::new(0.0, 0.0); nfft];
    hf[..n_taps].copy_from_slice(h);
    fwd.process(&mut hf);
    let scale = 1.0 / nfft as f64;
    hf.iter_mut().for_each(|v| *v *= scale);

    let mut y = Vec::with_capacity(out_len);
    let mut buf = vec![Complex64::new(0.0, 0.0); nfft];
    let mut scratch = vec![
        Complex64::new(0.0, 0.0);
        fwd.get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len())
    ];
    // block b produces outputs [b*step, b*step + step); it needs inputs
    // starting n_taps-1 samples earlier
    let mut start = 0usize;
    while start < out_len {
        for (j, slot) in buf.iter_mut().enumerate() {
            let idx = start as isize + j as isize - (n_taps as isize - 1);
            *slot = if idx >= 0 && (idx as usize) < x.len() {
                x[idx as usize]
            } else {
                Complex64::new(0.0, 0.0)
            };
        }
        fwd.process_with_scratch(&mut buf, &mut scratch);
        buf.iter_mut().zip(&hf).for_each(|(a, b)| *a *= b);
        inv.process_with_scratch(&mut buf, &mut scratch);
        let take = step.min(out_len - start);
        y.extend_from_slice(&buf[n_taps - 1..n_taps - 1 + take]);
        start += step;
    }
    y
}

fn convolve_complex_taps(x: &[Complex64], h: &[Complex64]) -> Vec<Complex64> {
    if x.is_empty() {
        return Vec::new();
    }
    if h.len() <= DIRECT_MAX_TAPS || x.len() <= DIRECT_MAX_TAPS {
        direct_complex(x, h)
    } else {
        fft_convolve(x, h)
    }
}

/// Full convolution of a real sequence with real taps.
pub fn convolve_real(x: &[f64], taps: &[f64]) -> Vec<f64> {
    if x.is_empty() {
        return Vec::new();
    }
    if taps.len() <= DIRECT_MAX_TAPS || x.len() <= DIRECT_MAX_TAPS {
        let mut y = vec![0.0; x.len() + taps.len() - 1];
        for (i, &xi) in x.iter().enumerate() {
            for (k, &hk) in taps.iter().enumerate() {
                y[i + k] += xi * hk;
            }
        }
        return y;
    }
    // Both halves of the input ride in one complex convolution: the real part
    // carries the first half, the imaginary part the second.
    let half = x.len().div_ceil(2);
    let z: Vec<Complex64> = (0..half)
        .map(|i| Complex64::new(x[i], x.get(half + i).copied().unwrap_or(0.0)))
        .collect();
    let h: Vec<Complex64> = taps.iter().map(|&t| Complex64::new(t, 0.0)).collect();
    let c = fft_convolve(&z, &h);
    let mut y = vec![0.0; x.len() + taps.len() - 1];
    for (i, v) in c.iter().enumerate() {
        y[i] += v.re;
        if half + i < y.len() {
            y[half + i] += v.im;
        }
    }
    y
}

/// Full convolution of a complex sequence with real taps.
pub fn convolve_complex(x: &[Complex64], taps: &[f64]) -> Vec<Complex64> {
    let h: Vec<Complex64> = taps.iter().map(|&t| Complex64::new(t, 0.0)).collect();
    convolve_complex_taps(x, &h)
}

/// Full convolution of a complex sequence with complex taps.
pub fn convolve_complex_complex(x: &[Complex64], taps: &[Complex64]) -> Vec<Complex64> {
    convolve_complex_taps(x, taps)
}

fn check(len: usize, taps: &[f64]) -> Result<()> {
    if taps.is_empty() {
        return Err(Error::param("taps", "empty tap list"));
    }
    if len == 0 {
        return Err(Error::param("signal", "empty signal"));
    }
    Ok(())
}

/// Filters a real RF waveform.
pub fn apply_filter(signal: &PassbandSignal, taps: &[f64], delay: Delay) -> Result<PassbandSignal> {
    check(signal.len(), taps)?;
    let y = trim(
        convolve_real(signal.samples(), taps),
        signal.len(),
        taps.len(),
        delay,
    );
    Ok(PassbandSignal::from_raw(y, signal.rate()))
}

/// Filters a complex baseband waveform with real taps.
pub fn apply_filter_baseband(
    signal: &BasebandSignal,
    taps: &[f64],
    delay: Delay,
) -> Result<BasebandSignal> {
    check(signal.len(), taps)?;
    let y = trim(
        convolve_complex(signal.samples(), taps),
        signal.len(),
        taps.len(),
        delay,
    );
    Ok(BasebandSignal::from_raw(
        y,
        signal.rate(),
        signal.center_frequency(),
    ))
}

/// Same-length, delay-compensated real filtering of a raw buffer.
pub fn filter_same(x: &[f64], taps: &[f64]) -> Vec<f64> {
    if x.is_empty() || taps.is_empty() {
        return x.to_vec();
    }
    trim(
        convolve_real(x, taps),
        x.len(),
        taps.len(),
        Delay::Compensate,
    )
}

/// Same-length, delay-compensated complex filtering of a raw buffer.
pub fn filter_same_complex(x: &[Complex64], taps: &[f64]) -> Vec<Complex64> {
    if x.is_empty() || taps.is_empty() {
        return x.to_vec();
    }
    trim(
        convolve_complex(x, taps),
        x.len(),
        taps.len(),
        Delay::Compensate,
    )
}
