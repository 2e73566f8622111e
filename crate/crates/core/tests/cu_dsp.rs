use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rofsim::calibration::CalibrationMatrix;
use rofsim::channel::{circular_normal, draw_channel, ChannelModel, GainModel};
use rofsim::cu_dsp::{
    apply_calibration, fit_equalizer, ls_estimate, ofdm_ls_estimate, zf_combiner, zf_precoder,
};
use rofsim::modem::ofdm::{ofdm_pilot, OfdmConfig};
use rofsim::modem::zc::orthogonal_pilots;
use rofsim::Error;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rand_matrix(rng: &mut ChaCha8Rng, r: usize, k: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(r, k, |_, _| circular_normal(rng))
}

fn pilot_matrix(u: usize, len: usize) -> DMatrix<Complex64> {
    let p = orthogonal_pilots(u, len, 25).unwrap();
    DMatrix::from_fn(u, len, |i, n| p[i][n])
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

#[test]
fn ls_estimate_is_exact_without_noise() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let h = rand_matrix(&mut rng, 3, 2);
    let p = pilot_matrix(2, 64);
    let est = ls_estimate(&(&h * &p), &p).unwrap();
    assert!(max_abs(&(est.h - h)) < 1e-10);
    assert_eq!(est.pilot_snr_db, f64::INFINITY);
}

#[test]
fn single_all_ones_pilot_gives_row_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let y = rand_matrix(&mut rng, 3, 16);
    let p = DMatrix::from_element(1, 16, c(1.0, 0.0));
    let est = ls_estimate(&y, &p).unwrap();
    for i in 0..3 {
        let mean: Complex64 = y.row(i).iter().sum::<Complex64>() / 16.0;
        assert!((est.h[(i, 0)] - mean).norm() < 1e-12);
    }
}

#[test]
fn rank_deficient_pilots_are_rejected() {
    let p = DMatrix::from_fn(2, 8, |_, n| c(n as f64, 1.0));
    let y = DMatrix::zeros(3, 8);
    assert!(matches!(ls_estimate(&y, &p), Err(Error::Singular(_))));
    assert!(ls_estimate(&DMatrix::zeros(3, 7), &pilot_matrix(2, 8)).is_err());
}

#[test]
fn ls_error_variance_and_bias_match_theory() {
    // unit-power pilots, length 64, SNR 20 dB: var = sigma^2 / 64
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let h = rand_matrix(&mut rng, 2, 2);
    let p = pilot_matrix(2, 64);
    let sigma2: f64 = 0.01;
    let trials = 2000;
    let mut sum_err = DMatrix::<Complex64>::zeros(2, 2);
    let mut sum_sq = 0.0;
    let mut snr = 0.0;
    for _ in 0..trials {
        let noise = rand_matrix(&mut rng, 2, 64) * c(sigma2.sqrt(), 0.0);
        let est = ls_estimate(&(&h * &p + noise), &p).unwrap();
        let e = est.h - &h;
        sum_sq += e.norm_squared() / 4.0;
        sum_err += e;
        snr += est.pilot_snr_db;
    }
    let var = sum_sq / trials as f64;
    let theory = sigma2 / 64.0;
    assert!(
        (var / theory - 1.0).abs() < 0.06,
        "variance {var} vs {theory}"
    );
    // unbiased: the mean error shrinks like sqrt(var / trials)
    let bias = max_abs(&(sum_err / c(trials as f64, 0.0)));
    assert!(bias < 4.0 * (theory / trials as f64).sqrt(), "bias {bias}");
    let expected_snr = 10.0 * ((&h * &p).norm_squared() / (2.0 * 64.0) / sigma2).log10();
    assert!((snr / trials as f64 - expected_snr).abs() < 0.5);
}

fn ofdm_case(
    cfg: &OfdmConfig,
    taps: &[(usize, Complex64)],
    noise: f64,
    seed: u64,
) -> (Vec<Complex64>, Vec<Complex64>, Vec<Complex64>) {
    let pilot = ofdm_pilot(cfg, 25).unwrap();
    let n = cfg.fft_size as f64;
    let truth: Vec<Complex64> = cfg
        .subcarrier_bins()
        .iter()
        .map(|&k| {
            taps.iter()
                .map(|&(d, g)| {
                    g * Complex64::from_polar(1.0, -std::f64::consts::TAU * (k * d) as f64 / n)
                })
                .sum()
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rx = truth
        .iter()
        .zip(&pilot)
        .map(|(h, p)| h * p + circular_normal(&mut rng) * noise.sqrt())
        .collect();
    (rx, pilot, truth)
}

#[test]
fn ofdm_window_keeps_taps_inside_and_drops_taps_outside() {
    let cfg = OfdmConfig::default();
    let taps = [(0, c(1.0, 0.0)), (3, c(0.3, -0.2)), (7, c(0.0, 0.1))];
    let (rx, pilot, truth) = ofdm_case(&cfg, &taps, 0.0, 0);
    let est = ofdm_ls_estimate(&rx, &pilot, &cfg, 20).unwrap();
    let err = est
        .h
        .iter()
        .zip(&truth)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    assert!(err < 1e-6, "{err}");

    let far = [(0, c(1.0, 0.0)), (25, c(0.5, 0.0))];
    let (rx, pilot, _) = ofdm_case(&cfg, &far, 0.0, 0);
    let est = ofdm_ls_estimate(&rx, &pilot, &cfg, 20).unwrap();
    // the tap at delay 25 is not representable: the estimate is biased
    let (_, _, only_first) = ofdm_case(&cfg, &far[..1], 0.0, 0);
    let bias: f64 = est
        .h
        .iter()
        .zip(&only_first)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        / est.h.len() as f64;
    assert!(bias > 1e-3 && bias < 0.25, "{bias}");
}

#[test]
fn ofdm_window_reduces_noise_by_fft_over_window() {
    let cfg = OfdmConfig {
        occupied_subcarriers: 2046,
        ..OfdmConfig::default()
    };
    let noise = 0.01;
    let mut raw = 0.0;
    let mut smooth = 0.0;
    for seed in 0..10 {
        let (rx, pilot, truth) =
            ofdm_case(&cfg, &[(0, c(1.0, 0.0)), (5, c(0.4, 0.3))], noise, seed);
        let est = ofdm_ls_estimate(&rx, &pilot, &cfg, 20).unwrap();
        raw += est
            .raw
            .iter()
            .zip(&truth)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>();
        smooth += est
            .h
            .iter()
            .zip(&truth)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>();
    }
    let gain = 10.0 * (raw / smooth).log10();
    let expected = 10.0 * (2048.0f64 / 20.0).log10();
    assert!((gain - expected).abs() < 1.0, "{gain} vs {expected}");
}

#[test]
fn ofdm_window_validation() {
    let cfg = OfdmConfig::default();
    let (rx, pilot, _) = ofdm_case(&cfg, &[(0, c(1.0, 0.0))], 0.0, 0);
    assert!(ofdm_ls_estimate(&rx, &pilot, &cfg, 4096).is_err());
    assert!(ofdm_ls_estimate(&rx, &pilot, &cfg, 0).is_err());
    assert!(ofdm_ls_estimate(&rx[1..], &pilot, &cfg, 20).is_err());
}

fn random_symbols(seed: u64, n: usize) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| circular_normal(&mut rng)).collect()
}

fn fir(x: &[Complex64], h: &[Complex64]) -> Vec<Complex64> {
    (0..x.len())
        .map(|n| {
            h.iter()
                .enumerate()
                .filter(|(k, _)| *k <= n)
                .map(|(k, g)| g * x[n - k])
                .sum()
        })
        .collect()
}

#[test]
fn single_tap_equalizer_inverts_a_gain() {
    let t = random_symbols(1, 64);
    let rx: Vec<Complex64> = t.iter().map(|v| v * 2.0).collect();
    let eq = fit_equalizer(&rx, &t, 1).unwrap();
    assert!((eq.taps[0] - c(0.5, 0.0)).norm() < 1e-12);
}

#[test]
fn ten_tap_equalizer_removes_two_tap_isi() {
    let t = random_symbols(2, 2000);
    let rx = fir(&t, &[c(1.0, 0.0), c(0.5, 0.2)]);
    let eq = fit_equalizer(&rx, &t, 10).unwrap();
    let z = eq.apply(&rx);
    let skip = 10;
    let err: f64 = z[skip..z.len() - skip]
        .iter()
        .zip(&t[skip..])
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    let sig: f64 = t[skip..t.len() - skip].iter().map(|v| v.norm_sqr()).sum();
    let isi_db = 10.0 * (err / sig).log10();
    assert!(isi_db < -35.0, "{isi_db}");

    let one = fit_equalizer(&rx, &t, 1).unwrap().apply(&rx);
    let err1: f64 = one[skip..one.len() - skip]
        .iter()
        .zip(&t[skip..])
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    assert!(err1 > 100.0 * err);
}

#[test]
fn equalizer_validation() {
    let t = random_symbols(3, 30);
    assert!(fit_equalizer(&t, &t, 10).is_err());
    assert!(fit_equalizer(&t, &t, 0).is_err());
    assert!(matches!(
        fit_equalizer(&vec![c(0.0, 0.0); 40], &random_symbols(3, 40), 2),
        Err(Error::Singular(_))
    ));
}

#[test]
fn zf_on_identity_and_diagonal() {
    let p = zf_precoder(&DMatrix::identity(2, 2), 2.0, None).unwrap();
    assert!(max_abs(&(&p.p - DMatrix::<Complex64>::identity(2, 2))) < 1e-12);
    let h = DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0, 0.0), c(2.0, 0.0)]));
    let p = zf_precoder(&h, 1.0, None).unwrap();
    let ratio = p.p[(1, 1)] / p.p[(0, 0)];
    assert!((ratio - c(0.5, 0.0)).norm() < 1e-12);
    assert!(p.p[(0, 1)].norm() < 1e-15);
    let w = zf_combiner(&DMatrix::identity(3, 3)).unwrap();
    assert!(max_abs(&(w - DMatrix::<Complex64>::identity(3, 3))) < 1e-12);
}

#[test]
fn zf_exactness_and_power_budget_for_random_channels() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for (b, u) in [(3, 2), (4, 4), (8, 3), (2, 1)] {
        let h = rand_matrix(&mut rng, b, u);
        let p = zf_precoder(&h, 5.0, None).unwrap();
        let eye = DMatrix::<Complex64>::identity(u, u);
        assert!(max_abs(&(h.transpose() * p.unnormalized() - &eye)) < 1e-9);
        assert!((p.p.norm_squared() / 5.0 - 1.0).abs() < 1e-6);
        assert!((p.rrh_powers().iter().sum::<f64>() - 5.0).abs() < 1e-9);
        let w = zf_combiner(&h).unwrap();
        assert!(max_abs(&(&w * &h - &eye)) < 1e-9);
    }
}

#[test]
fn combiner_scales_with_column() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let h = rand_matrix(&mut rng, 3, 2);
    let mut h2 = h.clone();
    h2.column_mut(1).scale_mut(2.0);
    let w = zf_combiner(&h).unwrap();
    let w2 = zf_combiner(&h2).unwrap();
    for k in 0..3 {
        assert!((w2[(1, k)] * 2.0 - w[(1, k)]).norm() < 1e-12);
        assert!((w2[(0, k)] - w[(0, k)]).norm() < 1e-12);
    }
}

#[test]
fn combiner_separates_a_two_ue_mixture() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let h = rand_matrix(&mut rng, 3, 2);
    let s = DMatrix::from_fn(2, 500, |_, _| circular_normal(&mut rng));
    let z = zf_combiner(&h).unwrap() * (&h * &s);
    let leak = (z - &s).norm_squared() / s.norm_squared();
    assert!(10.0 * leak.log10() < -60.0);
}

#[test]
fn rank_deficient_channels_are_rejected() {
    let h = DMatrix::from_fn(3, 2, |i, _| c(i as f64 + 1.0, 0.0));
    assert!(matches!(
        zf_precoder(&h, 1.0, None),
        Err(Error::Singular(_))
    ));
    assert!(matches!(zf_combiner(&h), Err(Error::Singular(_))));
    assert!(zf_precoder(&DMatrix::identity(2, 3), 1.0, None).is_err());
}

#[test]
fn calibration_by_identity_or_scalar_keeps_the_precoder() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let h = rand_matrix(&mut rng, 3, 2);
    let p = zf_precoder(&h, 1.0, Some(0.5)).unwrap();
    let same = apply_calibration(&p, &CalibrationMatrix::identity(3)).unwrap();
    assert!(max_abs(&(&same.p - &p.p)) < 1e-12);
    let alpha = c(0.3, 2.0);
    let scaled = apply_calibration(
        &p,
        &CalibrationMatrix::new(DVector::from_element(3, alpha)).unwrap(),
    )
    .unwrap();
    // equal up to one global phase
    let g = scaled.p[(0, 0)] / p.p[(0, 0)];
    assert!((g.norm() - 1.0).abs() < 1e-12);
    assert!(max_abs(&(&scaled.p - &p.p * g)) < 1e-12);
    assert!(apply_calibration(&p, &CalibrationMatrix::identity(2)).is_err());
}

/// Leakage of `G P` off its diagonal relative to the diagonal, dB.
fn leakage_db(g: &DMatrix<Complex64>, p: &DMatrix<Complex64>) -> f64 {
    let e = g * p;
    let mut on = 0.0;
    let mut off = 0.0;
    for i in 0..e.nrows() {
        for j in 0..e.ncols() {
            if i == j {
                on += e[(i, j)].norm_sqr();
            } else {
                off += e[(i, j)].norm_sqr();
            }
        }
    }
    10.0 * (off / on).log10()
}

#[test]
fn uplink_precoder_needs_calibration_for_the_downlink() {
    let ch = draw_channel(
        &ChannelModel::Rayleigh,
        3,
        2,
        GainModel::Random { spread_db: 3.0 },
        8,
    )
    .unwrap();
    let g = ch.downlink_matrix();
    let p_ul = zf_precoder(&ch.uplink_matrix(), 1.0, None).unwrap();
    let calibrated = apply_calibration(
        &p_ul,
        &CalibrationMatrix::new(ch.calibration_diagonal()).unwrap(),
    )
    .unwrap();
    assert!(leakage_db(&g, &calibrated.p) < -50.0);
    assert!(
        leakage_db(&g, &p_ul.p) > -10.0,
        "{}",
        leakage_db(&g, &p_ul.p)
    );
}
