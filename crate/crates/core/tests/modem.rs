use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rofsim::modem::rrc::{matched_filter, rrc_taps, RRC_SPAN};
use rofsim::modem::*;
use rofsim::sigcore::BasebandSignal;

/// Root-raised-cosine pulse by numerical inverse Fourier transform of the
/// square root of the raised-cosine spectrum (symbol period 1).
fn rrc_oracle(t: f64, beta: f64) -> f64 {
    let f_max = (1.0 + beta) / 2.0;
    let n = 20_000;
    let df = 2.0 * f_max / n as f64;
    let mut acc = 0.0;
    for k in 0..=n {
        let f: f64 = -f_max + k as f64 * df;
        let af = f.abs();
        let h = if af <= (1.0 - beta) / 2.0 {
            1.0
        } else {
            0.5 * (1.0 + (PI / beta * (af - (1.0 - beta) / 2.0)).cos())
        };
        let w = if k == 0 || k == n { 0.5 } else { 1.0 };
        acc += w * h.sqrt() * (2.0 * PI * f * t).cos() * df;
    }
    acc
}

#[test]
fn rrc_taps_follow_the_spectral_definition() {
    let (beta, sps) = (0.2, 8);
    let g = rrc_taps(beta, sps, RRC_SPAN);
    let c = g.len() / 2;
    let peak = rrc_oracle(0.0, beta);
    // compare the shape over the central four symbols, away from the taper
    for k in -32i64..=32 {
        let t = k as f64 / sps as f64;
        let want = rrc_oracle(t, beta) / peak;
        let got = g[(c as i64 + k) as usize] / g[c];
        assert!((got - want).abs() < 2e-3, "t = {t}: {got} vs {want}");
    }
}

#[test]
fn rrc_cascade_is_nyquist() {
    let sps = 8;
    let g = rrc_taps(0.2, sps, RRC_SPAN);
    let mut p = vec![0.0; 2 * g.len() - 1];
    for (i, a) in g.iter().enumerate() {
        for (j, b) in g.iter().enumerate() {
            p[i + j] += a * b;
        }
    }
    let c = g.len() - 1;
    let worst = (1..2 * RRC_SPAN)
        .filter_map(|k| p.get(c + k * sps))
        .map(|v| v.abs() / p[c])
        .fold(0.0, f64::max);
    assert!(20.0 * worst.log10() < -40.0, "ISI {worst}");
}

fn burst(n: usize, seed: u64) -> Vec<Complex64> {
    let mut s = zadoff_chu(25, 64).unwrap();
    s.extend(random_frame(&mut ChaCha8Rng::seed_from_u64(seed), Scheme::Qam16, n).symbols);
    s
}

fn evm(rx: &[Complex64], r: &[Complex64]) -> f64 {
    let e: f64 = rx.iter().zip(r).map(|(a, b)| (a - b).norm_sqr()).sum();
    let p: f64 = r.iter().map(|v| v.norm_sqr()).sum();
    100.0 * (e / p).sqrt()
}

#[test]
fn back_to_back_rrc_recovers_the_symbols() {
    let cfg = WaveformConfig::new(Scheme::Qam16, 10e6, 0.2, 8).unwrap();
    let s = burst(1000, 1);
    let x = rrc_modulate(&SymbolFrame::new(s.clone(), Scheme::Qam16), &cfg).unwrap();
    assert!((x.power_dbm() - 10.0 * (1.0f64 / 50.0 * 1000.0).log10()).abs() < 0.2);
    let y = rrc_demodulate(&x, &cfg, Timing::Fixed(cfg.cascade_delay()), s.len()).unwrap();
    assert!(evm(&y.symbols, &s) < 1.0);
}

#[test]
fn preamble_search_finds_a_delayed_burst() {
    let cfg = WaveformConfig::new(Scheme::Qam16, 10e6, 0.2, 8).unwrap();
    let s = burst(500, 2);
    let x = rrc_modulate(&SymbolFrame::new(s.clone(), Scheme::Qam16), &cfg).unwrap();
    let delay = 37;
    let mut d = vec![Complex64::new(0.0, 0.0); delay];
    d.extend_from_slice(x.samples());
    let xd = BasebandSignal::new(d, x.rate(), 0.0).unwrap();
    let pre = &s[..64];
    let y = rrc_demodulate(&xd, &cfg, Timing::Preamble(pre), s.len()).unwrap();
    assert!(evm(&y.symbols, &s) < 1.0);
    let mf = matched_filter(xd.samples(), &cfg);
    let (o, _) = rofsim::modem::rrc::find_preamble(&mf, &[pre], 8).unwrap();
    assert_eq!(o, cfg.cascade_delay() + delay);
}

#[test]
fn rate_mismatch_is_rejected() {
    let cfg = WaveformConfig::new(Scheme::Qpsk, 10e6, 0.2, 8).unwrap();
    let x = BasebandSignal::new(vec![Complex64::new(1.0, 0.0); 1000], 70e6, 0.0).unwrap();
    assert!(rrc_demodulate(&x, &cfg, Timing::Fixed(0), 10).is_err());
}

#[test]
fn constellations_have_unit_power_and_gray_labels() {
    for scheme in [Scheme::Qpsk, Scheme::Qam16] {
        let c = scheme.constellation();
        let p: f64 = c.iter().map(|v| v.norm_sqr()).sum::<f64>() / c.len() as f64;
        assert!((p - 1.0).abs() < 1e-12);
        // nearest neighbours differ in exactly one bit
        let dmin = (0..c.len())
            .flat_map(|i| (0..c.len()).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| (c[i] - c[j]).norm())
            .fold(f64::MAX, f64::min);
        for i in 0..c.len() {
            for j in 0..c.len() {
                if i != j && ((c[i] - c[j]).norm() - dmin).abs() < 1e-9 {
                    assert_eq!((i ^ j).count_ones(), 1, "{scheme}: {i} and {j}");
                }
            }
        }
    }
}

#[test]
fn noisy_symbols_slice_to_the_nearest_point() {
    let c = Scheme::Qam16.constellation();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let bits = random_bits(&mut rng, 4000);
    let tx = map_symbols(&bits, Scheme::Qam16).unwrap();
    let rx: Vec<Complex64> = tx
        .symbols
        .iter()
        .enumerate()
        .map(|(k, s)| s + Complex64::from_polar(0.1, k as f64))
        .collect();
    let sliced = slice_symbols(&rx, Scheme::Qam16);
    for (r, s) in rx.iter().zip(&sliced) {
        let best = c.iter().map(|p| (r - p).norm()).fold(f64::MAX, f64::min);
        assert!(((r - s).norm() - best).abs() < 1e-12);
    }
    assert_eq!(demap_symbols(&rx, Scheme::Qam16), bits);
}

#[test]
fn ofdm_round_trip_is_exact() {
    let cfg = OfdmConfig {
        subcarrier_spacing: 60e3,
        fft_size: 256,
        cyclic_prefix_length: 18,
        occupied_subcarriers: 150,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let s = random_frame(&mut rng, Scheme::Qam16, 150 * 4).symbols;
    let x = ofdm_modulate(&s, &cfg).unwrap();
    assert_eq!(x.len(), 4 * (256 + 18));
    assert!((x.rate() - 60e3 * 256.0).abs() < 1e-6);
    let y = ofdm_demodulate(&x, &cfg, 0, 4).unwrap();
    let flat: Vec<Complex64> = y.into_iter().flatten().collect();
    assert!(evm(&flat, &s) < 1e-10);
}

#[test]
fn ofdm_subcarriers_land_on_their_frequencies() {
    let cfg = OfdmConfig {
        subcarrier_spacing: 60e3,
        fft_size: 128,
        cyclic_prefix_length: 9,
        occupied_subcarriers: 20,
    };
    let idx = cfg.subcarrier_indices();
    assert_eq!(idx.len(), 20);
    assert!(!idx.contains(&0));
    // a single active subcarrier is a complex tone at k * spacing
    for (pos, &k) in idx.iter().enumerate().step_by(7) {
        let mut s = vec![Complex64::new(0.0, 0.0); 20];
        s[pos] = Complex64::new(1.0, 0.0);
        let x = ofdm_modulate(&s, &cfg).unwrap();
        let body = &x.samples()[9..];
        for n in 1..body.len() {
            let ratio = body[n] / body[n - 1];
            let want = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 128.0);
            assert!((ratio - want).norm() < 1e-9);
        }
    }
}

#[test]
fn orthogonal_pilots_have_zero_cross_correlation() {
    let p = orthogonal_pilots(4, 64, 25).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            let c: Complex64 = p[i].iter().zip(&p[j]).map(|(a, b)| a * b.conj()).sum();
            let want = if i == j { 64.0 } else { 0.0 };
            assert!((c.norm() - want).abs() < 1e-9);
        }
    }
}
