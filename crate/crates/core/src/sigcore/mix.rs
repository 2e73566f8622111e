//! Frequency translation with exact phase.
//!
//! The oscillator phase is computed from the sample index, never accumulated:
//! when both the carrier and the rate are integers in Hz the fractional cycle
//! count `fc * n / rate` is reduced with integer arithmetic, which makes the
//! phase exact for arbitrarily long buffers.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sigcore::filter::filter_same_complex;
use crate::sigcore::fir::{design_fir_cached, FilterSpec};
use crate::sigcore::resample::{gcd, rate_ratio, resample_complex, resample_real};
use crate::sigcore::signal::{BasebandSignal, PassbandSignal};

/// Longest phase period tabulated instead of computed per sample.
const MAX_TABLE: u64 = 1 << 20;

/// Complex exponential `exp(sign * j 2 pi fc n / rate)` evaluated by index.
#[derive(Debug, Clone)]
pub struct Oscillator {
    kind: OscKind,
}

#[derive(Debug, Clone)]
enum OscKind {
    Table(Vec<Complex64>),
    Modular { num: u128, den: u128, sign: f64 },
    Float { cycles_per_sample: f64, sign: f64 },
}

impl Oscillator {
    /// `sign` = +1 for up-mixing, -1 for down-mixing.
    pub fn new(fc: f64, rate: f64, sign: f64) -> Self {
        let integral = |x: f64| x.fract() == 0.0 && x.abs() < 9.0e15;
        if integral(fc) && integral(rate) && fc >= 0.0 {
            let (f, r) = (fc as u64, rate as u64);
            let g = gcd(f, r).max(1);
            let (num, den) = (f / g, r / g);
            if den <= MAX_TABLE {
                let table = (0..den)
                    .map(|n| {
                        let frac = ((num as u128 * n as u128) % den as u128) as f64 / den as f64;
                        Complex64::from_polar(1.0, sign * 2.0 * PI * frac)
                    })
                    .collect();
                return Self {
                    kind: OscKind::Table(table),
                };
            }
            return Self {
                kind: OscKind::Modular {
                    num: num as u128,
                    den: den as u128,
                    sign,
                },
            };
        }
        Self {
            kind: OscKind::Float {
                cycles_per_sample: fc / rate,
                sign,
            },
        }
    }

    /// Oscillator value at sample `n`.
    pub fn at(&self, n: usize) -> Complex64 {
        match &self.kind {
            OscKind::Table(t) => t[n % t.len()],
            OscKind::Modular { num, den, sign } => {
                let frac = ((num * n as u128) % den) as f64 / *den as f64;
                Complex64::from_polar(1.0, sign * 2.0 * PI * frac)
            }
            OscKind::Float {
                cycles_per_sample,
                sign,
            } => {
                // two-term product keeps the rounding error of a*n
                let nf = n as f64;
                let hi = cycles_per_sample * nf;
                let lo = cycles_per_sample.mul_add(nf, -hi);
                let frac = (hi.fract() + lo).rem_euclid(1.0);
                Complex64::from_polar(1.0, sign * 2.0 * PI * frac)
            }
        }
    }
}

/// `Re{x[n] e^{+j 2 pi fc n / rate}} * sqrt(2)` for a buffer already at `rate`.
pub fn mix_up(x: &[Complex64], fc: f64, rate: f64) -> Vec<f64> {
    let osc = Oscillator::new(fc, rate, 1.0);
    x.iter()
        .enumerate()
        .map(|(n, v)| (v * osc.at(n)).re * std::f64::consts::SQRT_2)
        .collect()
}

/// `x[n] * sqrt(2) * e^{-j 2 pi fc n / rate}`.
pub fn mix_down(x: &[f64], fc: f64, rate: f64) -> Vec<Complex64> {
    let osc = Oscillator::new(fc, rate, -1.0);
    x.iter()
        .enumerate()
        .map(|(n, &v)| osc.at(n) * (v * std::f64::consts::SQRT_2))
        .collect()
}

/// Resamples `bb` to `out_rate` and translates it to carrier `fc`.
///
/// The complex baseband power `mean|x|^2` and the real passband power
/// `mean(y^2)` agree, thanks to the `sqrt(2)` factor.
pub fn upconvert(bb: &BasebandSignal, fc: f64, out_rate: f64) -> Result<PassbandSignal> {
    if !(fc >= 0.0 && fc + bb.rate() / 2.0 < out_rate / 2.0) {
        return Err(Error::param(
            "fc",
            format!(
                "carrier {fc} Hz with {} Hz of baseband rate aliases at output rate {out_rate} Hz",
                bb.rate()
            ),
        ));
    }
    let (p, q) = rate_ratio(bb.rate(), out_rate)?;
    let x = resample_complex(bb.samples(), p, q);
    Ok(PassbandSignal::from_raw(mix_up(&x, fc, out_rate), out_rate))
}

/// Real-valued band translation used when a passband waveform must be moved to
/// a different RF rate without going through baseband.
pub fn resample_passband(pb: &PassbandSignal, out_rate: f64) -> Result<PassbandSignal> {
    let (p, q) = rate_ratio(pb.rate(), out_rate)?;
    Ok(PassbandSignal::from_raw(
        resample_real(pb.samples(), p, q),
        out_rate,
    ))
}

/// Largest integer decimation `d` of `rate` such that `rate / d` is integral
/// and not below `min_rate`.
fn integer_decimation(rate: f64, min_rate: f64) -> u64 {
    if !(rate.fract() == 0.0 && rate < 9.0e15) {
        return 1;
    }
    let r = rate as u64;
    let max_d = (rate / min_rate).floor() as u64;
    (1..=max_d.max(1)).rev().find(|d| r % d == 0).unwrap_or(1)
}

/// Translates `pb` from carrier `fc` to complex baseband at `out_rate`.
///
/// The mixed signal is lowpass filtered with `lpf` (designed at the input
/// rate), decimated by the largest integer factor that keeps the stopband
/// edge well inside Nyquist, and finally resampled to `out_rate`. The
/// filter's group delay is compensated.
pub fn downconvert(
    pb: &PassbandSignal,
    fc: f64,
    out_rate: f64,
    lpf: &FilterSpec,
) -> Result<BasebandSignal> {
    if lpf.passband_edge() > out_rate / 2.0 {
        return Err(Error::param(
            "lpf",
            format!(
                "passband edge {} Hz is wider than half the output rate {out_rate} Hz",
                lpf.passband_edge()
            ),
        ));
    }
    let taps = design_fir_cached(lpf, pb.rate())?;
    downconvert_with_taps(pb, fc, out_rate, lpf.stopband_edge(), taps.taps())
}

/// [`downconvert`] with a pre-designed filter whose stopband begins at
/// `stop_edge` Hz.
pub fn downconvert_with_taps(
    pb: &PassbandSignal,
    fc: f64,
    out_rate: f64,
    stop_edge: f64,
    taps: &[f64],
) -> Result<BasebandSignal> {
    let mixed = mix_down(pb.samples(), fc, pb.rate());
    let filtered = filter_same_complex(&mixed, taps);
    let d = integer_decimation(pb.rate(), (2.5 * stop_edge).max(out_rate));
    let decimated: Vec<Complex64> = filtered.into_iter().step_by(d as usize).collect();
    let mid_rate = pb.rate() / d as f64;
    let (p, q) = rate_ratio(mid_rate, out_rate)?;
    let y = resample_complex(&decimated, p, q);
    Ok(BasebandSignal::from_raw(y, out_rate, fc))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_matches_direct_phase() {
        let osc = Oscillator::new(2.35e9, 10e9, 1.0);
        for n in [0usize, 1, 199, 200, 12_345_678] {
            let want = Complex64::from_polar(
                1.0,
                2.0 * PI * ((235u128 * n as u128) % 1000) as f64 / 1000.0,
            );
            assert!((osc.at(n) - want).norm() < 1e-12);
        }
    }

    #[test]
    fn float_oscillator_has_no_drift() {
        let osc = Oscillator::new(1.0 / 3.0, 1.0, 1.0);
        let n = 3_000_000_000usize;
        assert!((osc.at(n) - Complex64::new(1.0, 0.0)).norm() < 1e-6);
    }

    #[test]
    fn decimation_factor() {
        assert_eq!(integer_decimation(10e9, 200e6), 50);
        assert_eq!(integer_decimation(10e9, 30e6), 320);
        assert_eq!(integer_decimation(1.5, 1.0), 1);
    }

    #[test]
    fn aliasing_upconvert_rejected() {
        let bb = BasebandSignal::new(vec![Complex64::new(1.0, 0.0); 8], 100e6, 0.0).unwrap();
        assert!(upconvert(&bb, 4.99e9, 10e9).is_err());
    }

    #[test]
    fn wide_lpf_rejected() {
        let pb = PassbandSignal::new(vec![0.0; 16], 10e9).unwrap();
        let lpf = FilterSpec::lowpass(100e6, 10e6, 40.0);
        assert!(downconvert(&pb, 2.35e9, 80e6, &lpf).is_err());
    }
}
