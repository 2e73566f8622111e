use std::f64::consts::PI;

use num_complex::Complex64;
use rofsim::sigcore::filter::convolve_real;
use rofsim::sigcore::power::{dbm_to_vrms, real_power_dbm};
use rofsim::sigcore::resample::{rate_ratio, resample_complex, resample_real};
use rofsim::sigcore::*;

/// |H(f)| of real taps by direct summation.
fn dtft(taps: &[f64], f: f64, rate: f64) -> f64 {
    let w = 2.0 * PI * f / rate;
    let (mut re, mut im) = (0.0, 0.0);
    for (n, t) in taps.iter().enumerate() {
        re += t * (w * n as f64).cos();
        im -= t * (w * n as f64).sin();
    }
    (re * re + im * im).sqrt()
}

#[test]
fn lowpass_meets_its_mask() {
    let rate = 1e9;
    let spec = FilterSpec::lowpass(100e6, 50e6, 60.0);
    let fir = design_fir(&spec, rate).unwrap();
    for k in 0..=20 {
        let f = 100e6 * k as f64 / 20.0;
        let g = 20.0 * dtft(fir.taps(), f, rate).log10();
        assert!(g.abs() < 0.1, "passband {f}: {g} dB");
    }
    for k in 0..=60 {
        let f = 150e6 + (rate / 2.0 - 150e6) * k as f64 / 60.0;
        let g = 20.0 * dtft(fir.taps(), f, rate).log10();
        assert!(g < -59.0, "stopband {f}: {g} dB");
    }
}

#[test]
fn bandpass_meets_its_mask() {
    let rate = 10e9;
    let spec = FilterSpec::bandpass(2.3e9, 2.4e9, 50e6, 60.0);
    let fir = design_fir(&spec, rate).unwrap();
    for f in [2.3e9, 2.33e9, 2.35e9, 2.37e9, 2.4e9] {
        assert!((20.0 * dtft(fir.taps(), f, rate).log10()).abs() < 0.1);
    }
    for f in [1.0e9, 2.0e9, 2.25e9, 2.45e9, 3.0e9, 4.7e9] {
        assert!(20.0 * dtft(fir.taps(), f, rate).log10() < -59.0, "{f}");
    }
}

#[test]
fn fast_convolution_matches_the_definition() {
    let x: Vec<f64> = (0..3000)
        .map(|n| ((n * 7919) % 101) as f64 / 50.0 - 1.0)
        .collect();
    let h: Vec<f64> = (0..257).map(|n| ((n * 31) % 17) as f64 - 8.0).collect();
    let y = convolve_real(&x, &h);
    assert_eq!(y.len(), x.len() + h.len() - 1);
    for n in (0..y.len()).step_by(97) {
        let direct: f64 = (0..h.len())
            .filter(|&k| k <= n && n - k < x.len())
            .map(|k| h[k] * x[n - k])
            .sum();
        assert!((y[n] - direct).abs() < 1e-9 * (1.0 + direct.abs()));
    }
}

#[test]
fn sine_power_in_dbm() {
    // 1 V peak into 50 ohm is 10 mW
    let x: Vec<f64> = (0..10_000)
        .map(|n| (2.0 * PI * n as f64 / 100.0).sin())
        .collect();
    assert!((real_power_dbm(&x) - 10.0).abs() < 1e-9);
    assert!((dbm_to_vrms(10.0) - 1.0 / 2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn rational_resampling_keeps_a_tone() {
    let (p, q) = rate_ratio(122.88e6, 10e9).unwrap();
    assert_eq!((p, q), (15625, 192));
    let (p, q) = rate_ratio(3.0, 2.0).unwrap();
    let f = 0.05; // cycles per input sample
    let x: Vec<f64> = (0..4000).map(|n| (2.0 * PI * f * n as f64).cos()).collect();
    let y = resample_real(&x, p, q);
    let ratio = p as f64 / q as f64;
    assert!((y.len() as f64 - x.len() as f64 * ratio).abs() <= 2.0);
    for m in 500..y.len() - 500 {
        let want = (2.0 * PI * f * m as f64 / ratio).cos();
        assert!((y[m] - want).abs() < 1e-3, "sample {m}: {} vs {want}", y[m]);
    }
}

#[test]
fn complex_resampling_keeps_a_negative_tone() {
    let f = -0.07;
    let x: Vec<Complex64> = (0..3000)
        .map(|n| Complex64::from_polar(1.0, 2.0 * PI * f * n as f64))
        .collect();
    let y = resample_complex(&x, 4, 5);
    for m in 400..y.len() - 400 {
        let want = Complex64::from_polar(1.0, 2.0 * PI * f * m as f64 * 5.0 / 4.0);
        assert!((y[m] - want).norm() < 1e-3);
    }
}

#[test]
fn up_and_down_conversion_round_trip() {
    let rate = 40e6;
    let n = 8000;
    let f0 = 1.5e6;
    let x: Vec<Complex64> = (0..n)
        .map(|k| {
            let t = k as f64 / rate;
            Complex64::from_polar(0.01, 2.0 * PI * f0 * t)
                + Complex64::from_polar(0.005, -2.0 * PI * 3.0e6 * t + 1.0)
        })
        .collect();
    let bb = BasebandSignal::new(x.clone(), rate, 0.0).unwrap();
    let fc = 2.35e9;
    let rf = upconvert(&bb, fc, 10e9).unwrap();
    // power is preserved by the sqrt(2) convention
    assert!((rf.power_dbm() - bb.power_dbm()).abs() < 0.05);
    // the upper tone sits at fc + f0; a 10 us window holds whole periods
    // of every tone, so the DFT bins are leakage free
    let w = &rf.samples()[100_000..200_000];
    let bin = |f: f64| {
        let s: Complex64 = w
            .iter()
            .enumerate()
            .map(|(m, v)| v * Complex64::from_polar(1.0, -2.0 * PI * f * m as f64 / 10e9))
            .sum();
        2.0 * s.norm() / w.len() as f64
    };
    assert!((bin(fc + f0) / (0.01 * 2f64.sqrt()) - 1.0).abs() < 0.01);
    assert!(bin(fc - f0) < 1e-4);

    let back = downconvert(&rf, fc, rate, &FilterSpec::lowpass(5e6, 5e6, 80.0)).unwrap();
    assert_eq!(back.rate(), rate);
    let e: f64 = back.samples()[500..n - 500]
        .iter()
        .zip(&x[500..n - 500])
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    let p: f64 = x[500..n - 500].iter().map(|v| v.norm_sqr()).sum();
    assert!(10.0 * (e / p).log10() < -50.0, "{}", 10.0 * (e / p).log10());
}

#[test]
fn welch_integrates_band_power() {
    let rate = 1e9;
    let x: Vec<f64> = (0..1 << 16)
        .map(|n| {
            0.3 * (2.0 * PI * 123e6 * n as f64 / rate).cos()
                + 0.1 * (2.0 * PI * 321e6 * n as f64 / rate).cos()
        })
        .collect();
    let psd = welch_psd(&PassbandSignal::new(x, rate).unwrap(), 4096, 0.5).unwrap();
    let p1 = psd.band_power(115e6, 131e6);
    let p2 = psd.band_power(313e6, 329e6);
    // mean-square of the tones: a^2 / 2
    assert!((p1 / 0.045 - 1.0).abs() < 0.02, "{p1}");
    assert!((p2 / 0.005 - 1.0).abs() < 0.02, "{p2}");
    assert!((psd.peak_frequency() - 123e6).abs() < 1e6);
}
