use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rofsim::bench::config::{ScenarioConfig, SweepAxis};
use rofsim::bench::sweep::{grid_indices, results_csv};
use rofsim::bench::*;
use rofsim::error::Error;
use rofsim::modem::{random_frame, Scheme};

fn minimal() -> ScenarioConfig {
    ScenarioConfig::from_toml_str("").unwrap()
}

/// Small, fast single-RRH scenario.
fn small_uplink() -> ScenarioConfig {
    let mut cfg = minimal();
    cfg.scenario.data_symbols = 200;
    cfg.scenario.preamble_length = 32;
    cfg
}

// ---------------------------------------------------------------- config

#[test]
fn minimal_file_gives_documented_defaults() {
    let cfg = minimal();
    assert_eq!(cfg.scenario.rrhs, 1);
    assert_eq!(cfg.scenario.data_symbols, 2000);
    assert_eq!(cfg.scenario.preamble_length, 64);
    assert_eq!(cfg.scenario.repeats, 10);
    assert_eq!(cfg.waveform.scheme, Scheme::Qam16);
    assert_eq!(cfg.waveform.rolloff, 0.2);
    assert_eq!(cfg.sdm.order, 4);
    assert_eq!(cfg.dither.frequency, 17e6);
    assert_eq!(cfg.dither.power_dbm, -4.5);
    assert_eq!(cfg.frontend.noise_dbm, -26.6);
    assert_eq!(cfg.scenario.sample_rate, 10e9);
    assert!(cfg.sweep.is_empty());
}

#[test]
fn out_of_range_rolloff_names_the_key() {
    let err = ScenarioConfig::from_toml_str("[waveform]\nrolloff = 1.5\n").unwrap_err();
    match err {
        Error::Config { key, reason } => {
            assert!(key.starts_with("waveform"), "key {key}");
            let msg = format!("{key}: {reason}");
            assert!(msg.contains("rolloff") && msg.contains("1.5"), "{msg}");
        }
        other => panic!("expected a config error, got {other}"),
    }
}

#[test]
fn unknown_keys_are_rejected() {
    assert!(ScenarioConfig::from_toml_str("[scenario]\nrrh = 3\n").is_err());
    assert!(ScenarioConfig::from_toml_str("[nonsense]\nx = 1\n").is_err());
    assert!(ScenarioConfig::from_toml_str("[dither]\nfreq = 1e6\n").is_err());
}

#[test]
fn unknown_sweep_parameter_is_rejected() {
    let text = "[[sweep]]\nparameter = \"dither.nope\"\nvalues = [1.0]\n";
    let err = ScenarioConfig::from_toml_str(text).unwrap_err();
    assert!(err.to_string().contains("dither.nope"), "{err}");
}

#[test]
fn sweep_over_dither_power_registers_every_point() {
    let text =
        "[[sweep]]\nparameter = \"dither.power_dbm\"\nvalues = [-10.0, -8.0, -6.0, -4.5, -2.0]\n";
    let cfg = ScenarioConfig::from_toml_str(text).unwrap();
    assert_eq!(grid_indices(&cfg.sweep).len(), 5);
    let p = cfg.at_point(&cfg.sweep, &[3]).unwrap();
    assert_eq!(p.dither.power_dbm, -4.5);
    assert!(p.sweep.is_empty());
}

#[test]
fn grid_is_the_cartesian_product() {
    let axes = [
        SweepAxis::new("a.b", &[1.0, 2.0, 3.0]),
        SweepAxis::new("c.d", &[4.0, 5.0]),
    ];
    let g = grid_indices(&axes);
    assert_eq!(g.len(), 6);
    assert_eq!(g[0], vec![0, 0]);
    assert_eq!(g[1], vec![0, 1]);
    assert_eq!(g[5], vec![2, 1]);
}

#[test]
fn linked_values_move_together() {
    let text = r#"
[[sweep]]
parameter = "waveform.symbol_rate"
values = [10e6, 20e6]
linked = [{ parameter = "dither.frequency", values = [16e6, 22e6] }]
"#;
    let cfg = ScenarioConfig::from_toml_str(text).unwrap();
    let p = cfg.at_point(&cfg.sweep, &[1]).unwrap();
    assert_eq!(p.waveform.symbol_rate, 20e6);
    assert_eq!(p.dither.frequency, 22e6);
    let bad = text.replace("[16e6, 22e6]", "[16e6]");
    assert!(ScenarioConfig::from_toml_str(&bad).is_err());
}

#[test]
fn integer_parameters_need_integral_values() {
    let cfg = minimal();
    assert_eq!(
        cfg.with_parameter("scenario.data_symbols", 500.0)
            .unwrap()
            .scenario
            .data_symbols,
        500
    );
    assert!(cfg.with_parameter("scenario.data_symbols", 500.5).is_err());
}

#[test]
fn toml_round_trip_and_fingerprint() {
    let cfg = minimal();
    let again = ScenarioConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
    assert_eq!(cfg.fingerprint(), again.fingerprint());
    assert_eq!(cfg.fingerprint().len(), 64);
    let other = cfg.with_parameter("dither.power_dbm", -6.0).unwrap();
    assert_ne!(cfg.fingerprint(), other.fingerprint());
}

#[test]
fn parse_config_reads_files_and_reports_missing_ones() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.toml");
    std::fs::write(&path, "[scenario]\nrepeats = 2\n").unwrap();
    assert_eq!(parse_config(&path).unwrap().scenario.repeats, 2);
    assert!(matches!(
        parse_config(dir.path().join("missing.toml")),
        Err(Error::Io { .. })
    ));
}

#[test]
fn shipped_configs_are_valid() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/configs");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        parse_config(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        n += 1;
    }
    assert!(n >= 10);
}

// ---------------------------------------------------------------- EVM

/// Straightforward EVM oracle written out independently of the library.
fn evm_oracle(rx: &[Complex64], r: &[Complex64]) -> f64 {
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for (a, b) in r.iter().zip(rx) {
        num += a.conj() * b;
        den += a.norm_sqr();
    }
    let g = num / den;
    let mut e = 0.0;
    let mut s = 0.0;
    for (a, b) in r.iter().zip(rx) {
        e += (b - g * a).norm_sqr();
        s += (g * a).norm_sqr();
    }
    100.0 * (e / s).sqrt()
}

fn reference(n: usize, seed: u64) -> Vec<Complex64> {
    random_frame(&mut ChaCha8Rng::seed_from_u64(seed), Scheme::Qam16, n).symbols
}

#[test]
fn evm_of_identical_frames_is_zero() {
    let r = reference(64, 1);
    assert!(compute_evm(&r, &r).unwrap() < 1e-12);
}

#[test]
fn evm_absorbs_complex_gain() {
    let r = reference(64, 2);
    let rx: Vec<_> = r
        .iter()
        .map(|v| v * Complex64::from_polar(1.1, 0.7))
        .collect();
    assert!(compute_evm(&rx, &r).unwrap() < 1e-12);
}

#[test]
fn evm_of_orthogonal_ten_percent_perturbation() {
    // e is orthogonal to the reference over the frame: e = 0.1 * (q - proj_r q)
    // scaled to rms 0.1 rms(ref)
    let r = reference(256, 3);
    let q = reference(256, 4);
    let rr: f64 = r.iter().map(|v| v.norm_sqr()).sum();
    let proj: Complex64 = r
        .iter()
        .zip(&q)
        .map(|(a, b)| a.conj() * b)
        .sum::<Complex64>()
        / rr;
    let e: Vec<Complex64> = r.iter().zip(&q).map(|(a, b)| b - proj * a).collect();
    let ee: f64 = e.iter().map(|v| v.norm_sqr()).sum();
    let k = 0.1 * (rr / ee).sqrt();
    let rx: Vec<Complex64> = r.iter().zip(&e).map(|(a, b)| a + b * k).collect();
    let evm = compute_evm(&rx, &r).unwrap();
    assert!((evm - 10.0).abs() < 1e-9, "{evm}");
}

#[test]
fn evm_matches_the_oracle() {
    let r = reference(500, 5);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let rx: Vec<Complex64> = r
        .iter()
        .map(|v| {
            let n: f64 = StandardNormal.sample(&mut rng);
            let m: f64 = StandardNormal.sample(&mut rng);
            v * Complex64::new(0.8, 0.3) + Complex64::new(n, m) * 0.05
        })
        .collect();
    let a = compute_evm(&rx, &r).unwrap();
    let b = evm_oracle(&rx, &r);
    assert!((a - b).abs() < 1e-10 * b);
}

#[test]
fn evm_on_awgn_tracks_snr() {
    for snr_db in [10.0, 20.0, 30.0] {
        let r = reference(40_000, 7);
        let sigma = 10f64.powf(-snr_db / 20.0) / 2f64.sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let rx: Vec<Complex64> = r
            .iter()
            .map(|v| {
                let n: f64 = StandardNormal.sample(&mut rng);
                let m: f64 = StandardNormal.sample(&mut rng);
                v + Complex64::new(n, m) * sigma
            })
            .collect();
        let expected = 100.0 * 10f64.powf(-snr_db / 20.0);
        let evm = compute_evm(&rx, &r).unwrap();
        assert!(
            (evm - expected).abs() <= 0.02 * expected,
            "snr {snr_db}: {evm} vs {expected}"
        );
    }
}

#[test]
fn evm_rejects_bad_frames() {
    let r = reference(64, 9);
    assert!(compute_evm(&r[..10], &r[..10]).is_err());
    assert!(compute_evm(&r[..20], &r[..21]).is_err());
    let zero = vec![Complex64::new(0.0, 0.0); 32];
    assert!(compute_evm(&r[..32], &zero).is_err());
}

#[test]
fn evm_db_and_requirements() {
    assert!((evm_db(10.0) + 20.0).abs() < 1e-12);
    assert!(meets_requirement(12.5, Scheme::Qam16));
    assert!(!meets_requirement(12.6, Scheme::Qam16));
    assert!(meets_requirement(17.5, Scheme::Qpsk));
}

// ---------------------------------------------------------------- runs

#[test]
fn unknown_experiment_lists_the_registered_ones() {
    let err = find_experiment("fig-99").err().unwrap();
    let msg = err.to_string();
    for e in registry() {
        assert!(msg.contains(e.name()), "{msg}");
    }
}

#[test]
fn registry_has_eleven_unique_experiments() {
    let names: std::collections::BTreeSet<_> = registry().iter().map(|e| e.name()).collect();
    assert_eq!(names.len(), 11);
}

#[test]
fn seeds_are_stable_and_distinct() {
    // pinned: changing the derivation breaks reproducibility of old results
    assert_eq!(derive_seed(1, "calibrate", 0, 0), 10425496811598862874);
    assert_ne!(
        derive_seed(1, "calibrate", 0, 1),
        derive_seed(1, "calibrate", 1, 0)
    );
    assert_ne!(
        derive_seed(1, "calibrate", 0, 0),
        derive_seed(2, "calibrate", 0, 0)
    );
    assert_ne!(
        derive_seed(1, "calibrate", 0, 0),
        derive_seed(1, "dmimo-uplink", 0, 0)
    );
}

#[test]
fn empty_sweep_writes_header_only_csv() {
    let mut cfg = small_uplink();
    cfg.sweep = vec![SweepAxis::new("dither.power_dbm", &[])];
    let exp = find_experiment("dynamic-range").unwrap();
    let res = run_experiment(exp.as_ref(), &cfg, &RunOptions::new(1)).unwrap();
    assert!(res.records.is_empty());
    let dir = tempfile::tempdir().unwrap();
    emit_results(&res, dir.path()).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
    assert!(csv.starts_with("point,dither.power_dbm,repeat,seed"));
}

fn ideal_dmimo() -> ScenarioConfig {
    let mut cfg = minimal();
    cfg.scenario.rrhs = 3;
    cfg.scenario.ues = 2;
    cfg.scenario.hardware = false;
    cfg.scenario.data_symbols = 256;
    cfg.waveform.symbol_rate = 5e6;
    cfg
}

#[test]
fn two_ue_run_reports_per_ue_columns() {
    let exp = find_experiment("dmimo-uplink").unwrap();
    let mut opts = RunOptions::new(3);
    opts.repeats = Some(2);
    let res = run_experiment(exp.as_ref(), &ideal_dmimo(), &opts).unwrap();
    let csv = results_csv(&res);
    let header = csv.lines().next().unwrap();
    assert_eq!(
        header,
        "point,repeat,seed,evm_ue1,evm_ue2,std_evm_ue1,std_evm_ue2"
    );
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn summary_json_carries_fingerprint_and_thresholds() {
    let exp = find_experiment("calibrate").unwrap();
    let res = run_experiment(exp.as_ref(), &ideal_dmimo(), &RunOptions::new(4)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let mut res = res;
    res.config.output.constellation = true;
    emit_results(&res, dir.path()).unwrap();
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(v["experiment"], "calibrate");
    assert_eq!(v["evm_requirement_percent"]["qam16"], 12.5);
    assert_eq!(v["evm_requirement_percent"]["qpsk"], 17.5);
    let fp = v["fingerprint"].as_str().unwrap();
    assert_eq!(fp, format!("{}:4", res.config.fingerprint()));
    assert_eq!(v["points"].as_array().unwrap().len(), 1);
}

#[test]
fn constellation_dump_is_one_pair_per_line() {
    let mut cfg = ideal_dmimo();
    cfg.output.constellation = true;
    let exp = find_experiment("dmimo-uplink").unwrap();
    let mut opts = RunOptions::new(5);
    opts.repeats = Some(1);
    let res = run_experiment(exp.as_ref(), &cfg, &opts).unwrap();
    let dir = tempfile::tempdir().unwrap();
    emit_results(&res, dir.path()).unwrap();
    let text = std::fs::read_to_string(dir.path().join("constellation_p0_r0.txt")).unwrap();
    assert_eq!(text.lines().count(), 256);
    for line in text.lines() {
        let parts: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(parts.len(), 2);
    }
}

#[test]
fn unwritable_output_is_an_error() {
    let exp = find_experiment("calibrate").unwrap();
    let res = run_experiment(exp.as_ref(), &ideal_dmimo(), &RunOptions::new(4)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("occupied");
    std::fs::write(&file, "x").unwrap();
    assert!(matches!(
        emit_results(&res, file.join("sub")),
        Err(Error::Io { .. })
    ));
}

#[test]
fn multi_rrh_experiments_reject_single_rrh_scenarios() {
    let exp = find_experiment("dmimo-downlink").unwrap();
    let err = run_experiment(exp.as_ref(), &small_uplink(), &RunOptions::new(1)).unwrap_err();
    assert!(err.to_string().contains("scenario.rrhs"), "{err}");
}

#[test]
fn hardware_sweep_is_identical_for_any_worker_count() {
    let mut cfg = small_uplink();
    cfg.sweep = vec![SweepAxis::new("scenario.input_power_dbm", &[-40.0, -30.0])];
    let exp = find_experiment("dynamic-range").unwrap();
    let run = |workers| {
        let opts = RunOptions {
            seed: 11,
            repeats: Some(2),
            workers: Some(workers),
        };
        results_csv(&run_experiment(exp.as_ref(), &cfg, &opts).unwrap())
    };
    let a = run(1);
    assert_eq!(a, run(3));
    assert_eq!(a.lines().count(), 5);
}
