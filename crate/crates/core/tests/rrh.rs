use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rofsim::rrh::*;
use rofsim::sigcore::power::{dbm_to_vrms, mean_square};
use rofsim::sigcore::{welch_psd, BinaryStream, FilterSpec, PassbandSignal};

/// Standard normal CDF by composite Simpson integration of the density.
fn phi(x: f64) -> f64 {
    let n = 20_000;
    let a = -12.0;
    if x <= a {
        return 0.0;
    }
    let h = (x - a) / n as f64;
    let f = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut s = f(a) + f(x);
    for i in 1..n {
        let t = a + i as f64 * h;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(t);
    }
    s * h / 3.0
}

/// Peak of an isolated +1 pulse of width `w` in a -1 background after a
/// Gaussian edge of 10-90 % time `rise`.
fn pulse_peak(w: f64, rise: f64) -> f64 {
    let sigma = rise / 2.563_103_131_089_201;
    -1.0 + 2.0 * (phi(w / 2.0 / sigma) - phi(-w / 2.0 / sigma))
}

#[test]
fn friis_cascades() {
    let one = friis_cascade(&[Stage::new(24.0, 1.5)], 100e6).unwrap();
    assert!((one.noise_figure_db - 1.5).abs() < 1e-12);

    let two = friis_cascade(&[Stage::new(24.0, 1.5), Stage::new(10.0, 12.5)], 100e6).unwrap();
    let f = 10f64.powf(0.15) + (10f64.powf(1.25) - 1.0) / 10f64.powf(2.4);
    let want = 10.0 * f.log10();
    assert!((two.noise_figure_db - want).abs() < 0.01);
    assert!(
        (two.noise_figure_db - 1.70).abs() < 0.01,
        "{}",
        two.noise_figure_db
    );

    let flat = friis_cascade(&[Stage::new(0.0, 0.0), Stage::new(0.0, 0.0)], 1e6).unwrap();
    assert!((flat.input_noise_dbm - (-174.0 + 60.0)).abs() < 1e-9);
    assert!((flat.output_noise_dbm - flat.input_noise_dbm).abs() < 1e-12);

    assert!(friis_cascade(&[], 1e6).is_err());
}

#[test]
fn receiver_cascade_noise_is_dominated_by_lna() {
    let fe = FrontendConfig::default();
    let c = friis_cascade(&fe.stages(0.0), 100e6).unwrap();
    assert!(
        c.noise_figure_db > 1.5 && c.noise_figure_db < 3.0,
        "{}",
        c.noise_figure_db
    );
}

fn tone(power_dbm: f64, len: usize, rate: f64) -> PassbandSignal {
    let a = dbm_to_vrms(power_dbm) * 2f64.sqrt();
    let x = (0..len)
        .map(|n| a * (2.0 * std::f64::consts::PI * 0.1234 * n as f64).cos())
        .collect();
    PassbandSignal::new(x, rate).unwrap()
}

#[test]
fn agc_regulates_and_clamps() {
    let fe = FrontendConfig::default();
    for (input, gain, output) in [
        (-40.0, 10.0, -30.0),
        (-70.0, 15.0, -55.0),
        (-10.0, -20.0, -30.0),
        (5.0, -30.0, -25.0),
    ] {
        let rf = tone(input, 20_000, 1e6);
        let (y, trace) = agc(&rf, &fe).unwrap();
        assert!(trace.len() >= 20);
        for s in &trace {
            assert!(
                (s.gain_db - gain).abs() < 0.01,
                "input {input}: gain {}",
                s.gain_db
            );
        }
        assert!(
            (y.power_dbm() - output).abs() < 0.01,
            "input {input}: out {}",
            y.power_dbm()
        );
    }
}

#[test]
fn agc_gain_constant_within_hold_window() {
    let fe = FrontendConfig::default();
    // power steps up by 10 dB half way through the second window
    let mut x = tone(-40.0, 3000, 1e6).into_samples();
    x[1500..].iter_mut().for_each(|v| *v *= 10f64.sqrt());
    let rf = PassbandSignal::new(x.clone(), 1e6).unwrap();
    let (y, trace) = agc(&rf, &fe).unwrap();
    assert_eq!(trace.len(), 3);
    let g1 = y.samples()[1499] / x[1499];
    let g2 = y.samples()[1500] / x[1500];
    assert!((g1 - g2).abs() < 1e-12);
    assert!(trace
        .iter()
        .all(|s| s.gain_db >= -30.0 && s.gain_db <= 15.0));
}

#[test]
fn agc_hold_mode_freezes_gain() {
    let fe = FrontendConfig {
        agc_mode: AgcMode::Hold(40.0),
        ..FrontendConfig::default()
    };
    let (_, trace) = agc(&tone(-50.0, 3000, 1e6), &fe).unwrap();
    assert!(trace.iter().all(|s| s.gain_db == 15.0));
}

#[test]
fn comparator_sign_rule_and_ties() {
    let rf = PassbandSignal::new(vec![0.3, 0.1, -0.2, 0.0], 1.0).unwrap();
    let d = PassbandSignal::new(vec![0.1, 0.1, 0.0, 0.0], 1.0).unwrap();
    let out = comparator_encode(&rf, &d).unwrap();
    assert_eq!(out.samples(), &[1, 1, -1, 1]);
    let other = PassbandSignal::new(vec![0.0; 4], 2.0).unwrap();
    assert!(comparator_encode(&rf, &other).is_err());
    let short = PassbandSignal::new(vec![0.0; 3], 1.0).unwrap();
    assert!(comparator_encode(&rf, &short).is_err());
}

#[test]
fn comparator_pwm_is_linear() {
    let (a, period, periods) = (0.5, 400usize, 50usize);
    let tri = PassbandSignal::new(
        triangle_wave(1.0 / period as f64, a, 1.0, period * periods),
        1.0,
    )
    .unwrap();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in -16..=16 {
        let d = 0.8 * a * i as f64 / 16.0;
        let rf = PassbandSignal::new(vec![d; tri.len()], 1.0).unwrap();
        let out = comparator_encode(&rf, &tri).unwrap();
        let mean = out.samples().iter().map(|&b| b as f64).sum::<f64>() / out.len() as f64;
        assert!(
            (mean - d / a).abs() <= 2.0 / periods as f64,
            "d {d}: {mean}"
        );
        xs.push(d / a);
        ys.push(mean);
    }
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r2 = sxy * sxy / (sxx * syy);
    assert!(r2 > 0.999, "R^2 = {r2}");
}

#[test]
fn dither_level_and_period() {
    let cfg = DitherConfig::new(17e6, -4.5);
    let fs = 10e9;
    let len = 200_000;
    let (tri, enc) = generate_dither(&cfg, fs, len).unwrap();
    let want_rms = (10f64.powf((-4.5 - 30.0) / 10.0) * 50.0).sqrt();
    // whole periods only: 17 MHz at 10 GS/s repeats every 10 000 samples
    let rms = mean_square(&tri.samples()[..190_000]).sqrt();
    assert!(
        (rms - want_rms).abs() / want_rms < 1e-3,
        "{rms} vs {want_rms}"
    );
    assert_eq!(enc.len(), len);

    // autocorrelation over lags around one period peaks at fs / 17 MHz
    let x = tri.samples();
    let corr = |lag: usize| -> f64 { (0..50_000).map(|n| x[n] * x[n + lag]).sum() };
    let period = (fs / 17e6).round() as usize;
    let best = (period - 40..=period + 40)
        .max_by(|&a, &b| corr(a).total_cmp(&corr(b)))
        .unwrap();
    assert!(
        best.abs_diff(period) <= 1,
        "peak at {best}, expected {period}"
    );
}

fn lpf() -> FilterSpec {
    FrontendConfig::default().lpf_spec()
}

#[test]
fn dither_reconstruction_error_below_minus_30_db() {
    let cfg = DitherConfig::new(17e6, -4.5);
    let (tri, enc) = generate_dither(&cfg, 10e9, 200_000).unwrap();
    let rec = reconstruct_dither(&enc, &lpf(), 0.0).unwrap();
    let (a, b) = (
        &tri.samples()[5_000..195_000],
        &rec.samples()[5_000..195_000],
    );
    let err: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let sig: f64 = a.iter().map(|x| x * x).sum();
    let db = 10.0 * (err / sig).log10();
    assert!(db <= -30.0, "reconstruction error {db:.1} dB");
}

#[test]
fn idle_encoding_reconstructs_to_near_zero() {
    use rofsim::sigma_delta::{osr, sdm_encode, SdmDesign};
    let d = SdmDesign::lowpass(2, osr(10e9, 180e6).unwrap());
    let (enc, _) = sdm_encode(&vec![0.0; 100_000], 10e9, &d).unwrap();
    let rec = reconstruct_dither(&enc, &lpf(), 0.0).unwrap();
    let ms = mean_square(&rec.samples()[5_000..95_000]);
    let dbfs = 10.0 * (ms / 0.5).log10();
    assert!(dbfs <= -35.0, "idle residual {dbfs:.1} dBFS");
}

#[test]
fn if_gain_is_linear() {
    let (_, enc) = generate_dither(&DitherConfig::new(17e6, -4.5), 10e9, 50_000).unwrap();
    let r0 = reconstruct_dither(&enc, &lpf(), 0.0).unwrap();
    let r15 = reconstruct_dither(&enc, &lpf(), 15.0).unwrap();
    let ratio = (mean_square(r15.samples()) / mean_square(r0.samples())).sqrt();
    assert!((ratio - 10f64.powf(0.75)).abs() < 1e-9);
}

fn bits(v: &[i8], rate: f64) -> BinaryStream {
    BinaryStream::new(v.to_vec(), rate).unwrap()
}

#[test]
fn ideal_fronthaul_is_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let s = bits(&[1, -1, -1, 1, 1, 1, -1], 10e9);
    let out = fronthaul_transport(&s, &FronthaulImpairment::default(), 10e9, &mut rng).unwrap();
    assert_eq!(out, s);
}

#[test]
fn fronthaul_keeps_bit_pulse_and_long_runs() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut v = vec![-1i8; 40];
    v[20] = 1; // 100 ps at 10 GS/s
    v[30..].iter_mut().for_each(|b| *b = 1); // a long run
    let s = bits(&v, 10e9);
    let out = fronthaul_transport(&s, &FronthaulImpairment::with_edges(), 10e9, &mut rng).unwrap();
    assert_eq!(out, s);
    assert!(pulse_peak(100e-12, 54e-12) > 0.9);
}

#[test]
fn short_pulses_follow_gaussian_edge_oracle() {
    // fine grid: 400 GS/s, 2.5 ps per sample
    let fine = 400e9;
    for (width_samples, expect_survive) in [(40usize, true), (20, true), (10, false)] {
        let mut lv = vec![-1.0; 400];
        lv[200..200 + width_samples]
            .iter_mut()
            .for_each(|v| *v = 1.0);
        let y = smooth_levels(&lv, fine, 54e-12);
        let peak = y.iter().cloned().fold(f64::MIN, f64::max);
        let w = width_samples as f64 / fine;
        let want = pulse_peak(w, 54e-12);
        assert!((peak - want).abs() < 0.03, "width {w:e}: {peak} vs {want}");
        assert_eq!(peak >= 0.0, expect_survive, "width {w:e}: peak {peak}");
    }
    // a 50 ps pulse is strongly attenuated but stays above the threshold
    assert!(pulse_peak(50e-12, 54e-12) < 0.6);
}

#[test]
fn fronthaul_rejects_coarse_grid_and_is_seeded() {
    let s = bits(&[1, -1, 1, -1, 1, 1, -1, -1], 10e9);
    let bad = FronthaulImpairment {
        oversampling: 2,
        ..FronthaulImpairment::with_edges()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    assert!(fronthaul_transport(&s, &bad, 10e9, &mut rng).is_err());

    let jittery = FronthaulImpairment {
        sampling_jitter_rms: 20e-12,
        metastable_band: 0.2,
        ..FronthaulImpairment::with_edges()
    };
    let long: Vec<i8> = (0..5000)
        .map(|i| if (i * 7919) % 13 < 6 { 1 } else { -1 })
        .collect();
    let s = bits(&long, 10e9);
    let a = fronthaul_transport(&s, &jittery, 10e9, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    let b = fronthaul_transport(&s, &jittery, 10e9, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    assert_eq!(a, b);
    assert!(a.samples().iter().all(|&v| v == 1 || v == -1));
    let flips = a
        .samples()
        .iter()
        .zip(s.samples())
        .filter(|(x, y)| x != y)
        .count();
    assert!(flips > 0 && flips < 2500, "{flips}");
}

#[test]
fn band_limited_noise_power_and_band() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x = band_limited_noise(&mut rng, 1 << 18, 10e9, (2.3e9, 2.4e9), -26.6).unwrap();
    let p = PassbandSignal::new(x, 10e9).unwrap();
    assert!((p.power_dbm() + 26.6).abs() < 0.2, "{}", p.power_dbm());
    let psd = welch_psd(&p, 4096, 0.5).unwrap();
    let inband = psd.band_power(2.3e9, 2.4e9);
    let total = psd.total_power();
    assert!(inband / total > 0.98, "{}", inband / total);
}

#[test]
fn uplink_chain_edge_cases() {
    let fe = FrontendConfig::default();
    let empty = PassbandSignal::new(Vec::new(), 10e9).unwrap();
    let out = uplink_rrh_chain(
        &empty,
        &fe,
        &DitherConfig::default(),
        &FronthaulImpairment::default(),
        1,
    )
    .unwrap();
    assert!(out.stream.is_empty());

    let rf = tone(-30.0, 20_000, 10e9);
    let a = uplink_rrh_chain(
        &rf,
        &fe,
        &DitherConfig::default(),
        &FronthaulImpairment::default(),
        7,
    )
    .unwrap();
    let b = uplink_rrh_chain(
        &rf,
        &fe,
        &DitherConfig::default(),
        &FronthaulImpairment::default(),
        7,
    )
    .unwrap();
    assert_eq!(a.stream, b.stream);
    assert_eq!(a.stream.len(), rf.len());
}

#[test]
fn downlink_chain_applies_pa_gain() {
    let tx = TransmitterConfig::default();
    let v: Vec<i8> = (0..20_000)
        .map(|i| if i % 2 == 0 { 1 } else { -1 })
        .collect();
    let out = downlink_rrh_chain(&bits(&v, 10e9), &tx, &FronthaulImpairment::default(), 0).unwrap();
    assert_eq!(out.len(), v.len());
    // alternating bits sit at 5 GHz, far outside the BPF
    let ms = mean_square(&out.samples()[2_000..18_000]);
    assert!(ms < 1e-6 * 0.16 * 10f64.powf(3.58));
}
