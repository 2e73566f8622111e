//! Polyphase rational resampling.
//!
//! The anti-imaging/anti-aliasing prototype is a Kaiser windowed sinc
//! designed at the intermediate rate `p * rate_in`, flat to 0.4 and stopped
//! at 0.5 of the lower of the two rates. Prototypes depend only on `(p, q)`
//! and are cached process-wide.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sigcore::fir::{kaiser_beta, kaiser_length, kaiser_window, windowed_sinc};
use crate::sigcore::signal::{BasebandSignal, PassbandSignal};

/// Stopband attenuation of the resampling prototype.
pub const RESAMPLER_ATTEN_DB: f64 = 90.0;

/// Fractions of the lower rate bounding the transition band.
pub const RESAMPLER_PASS_FRACTION: f64 = 0.4;
pub const RESAMPLER_STOP_FRACTION: f64 = 0.5;

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn is_integral(x: f64) -> bool {
    x.fract() == 0.0 && x.abs() < 9.0e15
}

/// Reduced `p / q` with `rate_out = rate_in * p / q`.
///
/// Integer-valued rates are reduced exactly; otherwise the ratio is
/// approximated by continued fractions with a denominator bound of 10^6.
pub fn rate_ratio(rate_in: f64, rate_out: f64) -> Result<(u64, u64)> {
    if !(rate_in > 0.0 && rate_out > 0.0 && rate_in.is_finite() && rate_out.is_finite()) {
        return Err(Error::param(
            "rate",
            format!("rates must be positive, got {rate_in} -> {rate_out}"),
        ));
    }
    if is_integral(rate_in) && is_integral(rate_out) {
        let (a, b) = (rate_out as u64, rate_in as u64);
        let g = gcd(a, b);
        return Ok((a / g, b / g));
    }
    let x = rate_out / rate_in;
    let (mut h0, mut h1, mut k0, mut k1) = (0u64, 1u64, 1u64, 0u64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor() as u64;
        let h2 = a * h1 + h0;
        let k2 = a * k1 + k0;
        if k2 > 1_000_000 {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let f = r - a as f64;
        if f < 1e-12 || ((h1 as f64 / k1 as f64) - x).abs() < 1e-12 * x {
            break;
        }
        r = 1.0 / f;
    }
    if h1 == 0 || k1 == 0 {
        return Err(Error::param(
            "rate",
            format!("cannot represent ratio {x} as a rational"),
        ));
    }
    Ok((h1, k1))
}

type Cache = Mutex<HashMap<(u64, u64), Arc<Vec<f64>>>>;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Prototype filter for a `p / q` resampler, scaled by `p` so interpolation
/// preserves amplitude.
pub fn prototype(p: u64, q: u64) -> Arc<Vec<f64>> {
    if let Some(h) = cache()
        .lock()
        .expect("resampler cache poisoned")
        .get(&(p, q))
    {
        return Arc::clone(h);
    }
    // normalized to the design rate p * rate_in
    let lower = (1.0f64).min(p as f64 / q as f64) / p as f64;
    let pass = RESAMPLER_PASS_FRACTION * lower;
    let stop = RESAMPLER_STOP_FRACTION * lower;
    let len = kaiser_length(RESAMPLER_ATTEN_DB, stop - pass);
    let win = kaiser_window(len, kaiser_beta(RESAMPLER_ATTEN_DB));
    let mut h = windowed_sinc(len, (pass + stop) / 2.0, &win);
    let dc: f64 = h.iter().sum();
    h.iter_mut().for_each(|v| *v *= p as f64 / dc);
    let h = Arc::new(h);
    cache()
        .lock()
        .expect("resampler cache poisoned")
        .insert((p, q), Arc::clone(&h));
    h
}

fn resample_generic<T>(x: &[T], p: u64, q: u64, zero: T, mac: impl Fn(&mut T, f64, &T)) -> Vec<T>
where
    T: Copy,
{
    let (p, q) = {
        let g = gcd(p, q);
        (p / g, q / g)
    };
    if p == 1 && q == 1 {
        return x.to_vec();
    }
    let h = prototype(p, q);
    let len = h.len() as u64;
    let delay = (len - 1) / 2;
    let n_in = x.len() as u64;
    let n_out = (n_in * p).div_ceil(q);
    let mut y = vec![zero; n_out as usize];
    for (m, out) in y.iter_mut().enumerate() {
        // upsampled index i = m*q + delay - k must be a multiple of p
        let base = m as u64 * q + delay;
        let k0 = base % p;
        let mut acc = zero;
        let mut k = k0;
        while k < len {
            let i = (base - k) / p;
            if i < n_in {
                mac(&mut acc, h[k as usize], &x[i as usize]);
            }
            if base < k + p {
                break;
            }
            k += p;
        }
        *out = acc;
    }
    y
}

/// Resamples a real buffer by `p / q`.
pub fn resample_real(x: &[f64], p: u64, q: u64) -> Vec<f64> {
    resample_generic(x, p, q, 0.0, |acc, h, v| *acc += h * v)
}

/// Resamples a complex buffer by `p / q`.
pub fn resample_complex(x: &[Complex64], p: u64, q: u64) -> Vec<Complex64> {
    resample_generic(x, p, q, Complex64::new(0.0, 0.0), |acc, h, v| *acc += v * h)
}

fn check_pq(p: u64, q: u64) -> Result<()> {
    if p == 0 || q == 0 {
        return Err(Error::param("p/q", "resampling factors must be >= 1"));
    }
    Ok(())
}

/// Rational resampling of a real waveform; output rate is `rate * p / q`.
pub fn resample_rational(signal: &PassbandSignal, p: u64, q: u64) -> Result<PassbandSignal> {
    check_pq(p, q)?;
    let y = resample_real(signal.samples(), p, q);
    Ok(PassbandSignal::from_raw(
        y,
        signal.rate() * p as f64 / q as f64,
    ))
}

/// Rational resampling of a complex baseband waveform.
pub fn resample_rational_baseband(
    signal: &BasebandSignal,
    p: u64,
    q: u64,
) -> Result<BasebandSignal> {
    check_pq(p, q)?;
    let y = resample_complex(signal.samples(), p, q);
    Ok(BasebandSignal::from_raw(
        y,
        signal.rate() * p as f64 / q as f64,
        signal.center_frequency(),
    ))
}

/// Resamples a complex baseband waveform to an arbitrary target rate.
pub fn resample_to_rate(signal: &BasebandSignal, rate_out: f64) -> Result<BasebandSignal> {
    let (p, q) = rate_ratio(signal.rate(), rate_out)?;
    let mut out = resample_rational_baseband(signal, p, q)?;
    // keep the requested rate exactly when the ratio was approximated
    out = BasebandSignal::from_raw(out.into_samples(), rate_out, signal.center_frequency());
    Ok(out)
}
