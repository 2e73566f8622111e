//! Multi-RRH experiments: reciprocity, calibration and the full TDD round
//! trip with zero-forcing in both directions.
//!
//! All streams share the CU clock, so symbols are taken at the known burst
//! timing. Transceiver gains of RRHs and UEs live in the channel state; the
//! 1-bit chains themselves are identical for every RRH.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{ue_metric, Experiment, PointOutcome};
use crate::bench::config::{ChannelKind, ScenarioConfig};
use crate::bench::evm::compute_evm;
use crate::bench::link::{
    downlink_transmit, sc_half_band, sc_symbols_fixed, sc_uplink, ue_receive, SeedStream,
};
use crate::calibration::{
    calibration_quality, estimate_c, simulate_sounding, CalibrationEstimate, CalibrationOptions,
    SoundingMatrix,
};
use crate::channel::{
    circular_normal, downlink_apply, draw_channel, inter_rrh_matrix, uplink_apply, ChannelModel,
    ChannelState, GainModel, Geometry, NoiseConfig,
};
use crate::cu_dsp::{apply_calibration, ls_estimate, zf_combiner, zf_precoder};
use crate::error::{Error, Result};
use crate::modem::qam::SymbolFrame;
use crate::modem::random_frame;
use crate::modem::rrc::{rrc_modulate, WaveformConfig};
use crate::modem::zc::{orthogonal_pilots, zadoff_chu, PILOT_ROOT};
use crate::sigcore::power::db_to_amplitude;
use crate::sigcore::signal::BasebandSignal;

/// Path gain applied to unit-variance Rayleigh channels, matching the
/// line-of-sight loss over the 2 m lab distance at 2.35 GHz.
pub const RAYLEIGH_PATH_GAIN_DB: f64 = -46.0;

/// Propagation and transceiver gains of one drop.
struct Scene {
    ch: ChannelState,
    /// Symmetric RRH-to-RRH propagation used for sounding.
    inter: DMatrix<Complex64>,
}

fn scene(cfg: &ScenarioConfig, seed: u64) -> Result<Scene> {
    let (b, u) = (cfg.scenario.rrhs, cfg.scenario.ues);
    if b < 2 {
        return Err(Error::Config {
            key: "scenario.rrhs".into(),
            reason: "multi-RRH experiments need at least 2 RRHs".into(),
        });
    }
    if u > b {
        return Err(Error::Config {
            key: "scenario.ues".into(),
            reason: format!("{u} UEs cannot be separated by {b} RRHs"),
        });
    }
    let gains = GainModel::Random {
        spread_db: cfg.channel.gain_spread_db,
    };
    let mut seeds = SeedStream::new(seed);
    match cfg.channel.model {
        ChannelKind::Los => {
            let lab = Geometry::lab();
            if b > lab.rrh.len() || u > lab.ue.len() {
                return Err(Error::Config {
                    key: "scenario".into(),
                    reason: format!(
                        "the line-of-sight lab has {} RRHs and {} UEs; use channel.model = \"rayleigh\" for more",
                        lab.rrh.len(),
                        lab.ue.len()
                    ),
                });
            }
            let g = Geometry {
                rrh: lab.rrh[..b].to_vec(),
                ue: lab.ue[..u].to_vec(),
                wavelength: lab.wavelength,
            };
            let inter = inter_rrh_matrix(&g.rrh, g.wavelength)?;
            let ch = draw_channel(&ChannelModel::Los(g), b, u, gains, seeds.next())?;
            Ok(Scene { ch, inter })
        }
        ChannelKind::Rayleigh => {
            let k = Complex64::new(db_to_amplitude(RAYLEIGH_PATH_GAIN_DB), 0.0);
            let mut ch = draw_channel(&ChannelModel::Rayleigh, b, u, gains, seeds.next())?;
            ch.h *= k;
            let mut rng = seeds.rng();
            let mut inter = DMatrix::zeros(b, b);
            for i in 0..b {
                for j in i + 1..b {
                    let v = circular_normal(&mut rng) * k;
                    inter[(i, j)] = v;
                    inter[(j, i)] = v;
                }
            }
            Ok(Scene { ch, inter })
        }
    }
}

fn modulate_rows(rows: &DMatrix<Complex64>, wf: &WaveformConfig) -> Result<Vec<BasebandSignal>> {
    rows.row_iter()
        .map(|r| {
            rrc_modulate(
                &SymbolFrame::new(r.iter().cloned().collect(), wf.scheme),
                wf,
            )
        })
        .collect()
}

/// UEs transmit the rows of `symbols`; returns what the CU recovers from
/// each RRH (RRHs x symbols).
fn uplink_collect(
    cfg: &ScenarioConfig,
    wf: &WaveformConfig,
    ch: &ChannelState,
    symbols: &DMatrix<Complex64>,
    seed: u64,
) -> Result<DMatrix<Complex64>> {
    let tx: Vec<BasebandSignal> = modulate_rows(symbols, wf)?
        .into_iter()
        .map(|s| s.with_power_dbm(cfg.channel.ue_tx_power_dbm))
        .collect::<Result<_>>()?;
    let rx = uplink_apply(&tx, ch, &NoiseConfig::none())?;
    let mut seeds = SeedStream::new(seed);
    let n = symbols.ncols();
    let mut y = DMatrix::zeros(rx.len(), n);
    for (b, r) in rx.iter().enumerate() {
        let bb = sc_uplink(cfg, wf, r, seeds.next())?;
        let s = sc_symbols_fixed(&bb, wf, n)?;
        y.row_mut(b).iter_mut().zip(s).for_each(|(d, v)| *d = v);
    }
    Ok(y)
}

/// RRHs transmit the rows of `symbols`; returns what each UE recovers
/// (UEs x symbols).
fn downlink_deliver(
    cfg: &ScenarioConfig,
    wf: &WaveformConfig,
    ch: &ChannelState,
    symbols: &DMatrix<Complex64>,
    seed: u64,
) -> Result<DMatrix<Complex64>> {
    let mut seeds = SeedStream::new(seed);
    let streams = modulate_rows(symbols, wf)?;
    let tx = downlink_transmit(cfg, &streams, sc_half_band(wf), seeds.next())?;
    let rx = downlink_apply(&tx, ch, &NoiseConfig::none())?;
    let n = symbols.ncols();
    let mut y = DMatrix::zeros(rx.len(), n);
    for (u, r) in rx.iter().enumerate() {
        let bb = ue_receive(cfg, r, seeds.next())?;
        let s = sc_symbols_fixed(&bb, wf, n)?;
        y.row_mut(u).iter_mut().zip(s).for_each(|(d, v)| *d = v);
    }
    Ok(y)
}

fn pilot_matrix(count: usize, length: usize) -> Result<DMatrix<Complex64>> {
    let p = orthogonal_pilots(count, length, PILOT_ROOT)?;
    Ok(DMatrix::from_fn(count, length, |i, j| p[i][j]))
}

/// Every RRH in turn sends a pilot to all others. Without hardware this is
/// the algebraic sounding model with optional receiver noise; with
/// hardware each transmission crosses a downlink and an uplink chain.
fn sound(
    cfg: &ScenarioConfig,
    wf: &WaveformConfig,
    sc: &Scene,
    seed: u64,
) -> Result<SoundingMatrix> {
    let length = cfg.preamble_length();
    let pilot = zadoff_chu(PILOT_ROOT, length)?;
    if !cfg.scenario.hardware {
        let noise = match cfg.channel.sounding_noise_dbm {
            Some(p) => NoiseConfig::new(p, seed),
            None => NoiseConfig::none(),
        };
        return simulate_sounding(&sc.ch, &sc.inter, &pilot, &noise);
    }
    let b = sc.ch.rrhs();
    let mut seeds = SeedStream::new(seed);
    let bb = rrc_modulate(&SymbolFrame::new(pilot.clone(), wf.scheme), wf)?;
    let tx: Vec<BasebandSignal> = (0..b)
        .map(|_| {
            Ok(downlink_transmit(
                cfg,
                std::slice::from_ref(&bb),
                sc_half_band(wf),
                seeds.next(),
            )?
            .remove(0))
        })
        .collect::<Result<_>>()?;
    // one attenuation for all RRHs, set from the first one's output
    let k = db_to_amplitude(cfg.channel.sounding_power_dbm - tx[0].power_dbm());
    let energy: f64 = pilot.iter().map(|v| v.norm_sqr()).sum();
    let mut y = DMatrix::zeros(b, b);
    for j in 0..b {
        for i in (0..b).filter(|&i| i != j) {
            let g = sc.ch.r_rrh[i] * sc.inter[(i, j)] * sc.ch.t_rrh[j] * k;
            let rx = tx[j].clone().scale(g);
            let out = sc_uplink(cfg, wf, &rx, seeds.next())?;
            let s = sc_symbols_fixed(&out, wf, length)?;
            let corr: Complex64 = s.iter().zip(&pilot).map(|(r, p)| r * p.conj()).sum();
            y[(i, j)] = corr / energy;
        }
    }
    SoundingMatrix::new(y)
}

fn calibrate(
    cfg: &ScenarioConfig,
    wf: &WaveformConfig,
    sc: &Scene,
    seed: u64,
) -> Result<CalibrationEstimate> {
    estimate_c(&sound(cfg, wf, sc, seed)?, &CalibrationOptions::default())
}

fn row_evms(z: &DMatrix<Complex64>, reference: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    (0..z.nrows())
        .map(|u| {
            let a: Vec<Complex64> = z.row(u).iter().cloned().collect();
            let r: Vec<Complex64> = reference.row(u).iter().cloned().collect();
            compute_evm(&a, &r)
        })
        .collect()
}

fn random_symbols(cfg: &ScenarioConfig, rows: usize, seed: u64) -> DMatrix<Complex64> {
    let mut rng = SeedStream::new(seed).rng();
    let n = cfg.scenario.data_symbols;
    let all = random_frame(&mut rng, cfg.waveform.scheme, rows * n).symbols;
    DMatrix::from_row_slice(rows, n, &all)
}

/// Uplink pilots and data; returns `(H_UL estimate, combined data EVMs)`.
fn uplink_phase(
    cfg: &ScenarioConfig,
    wf: &WaveformConfig,
    sc: &Scene,
    seed: u64,
) -> Result<(DMatrix<Complex64>, Vec<f64>, Vec<Complex64>)> {
    let mut seeds = SeedStream::new(seed);
    let u = sc.ch.ues();
    let np = cfg.preamble_length();
    let pilots = pilot_matrix(u, np)?;
    let data = random_symbols(cfg, u, seeds.next());
    let mut frame = DMatrix::zeros(u, np + data.ncols());
    frame.columns_mut(0, np).copy_from(&pilots);
    frame.columns_mut(np, data.ncols()).copy_from(&data);
    let y = uplink_collect(cfg, wf, &sc.ch, &frame, seeds.next())?;
    let h_ul = ls_estimate(&y.columns(0, np).into_owned(), &pilots)?.h;
    let w = zf_combiner(&h_ul)?;
    let z = w * y.columns(np, data.ncols());
    let evms = row_evms(&z, &data)?;
    let first = z.row(0).iter().cloned().collect();
    Ok((h_ul, evms, first))
}

/// Downlink pilots from all RRHs; returns the `RRHs x UEs` estimate of the
/// transpose of the effective downlink channel.
fn downlink_sounding(
    cfg: &ScenarioConfig,
    wf: &WaveformConfig,
    sc: &Scene,
    seed: u64,
) -> Result<DMatrix<Complex64>> {
    let pilots = pilot_matrix(sc.ch.rrhs(), cfg.preamble_length())?;
    let y = downlink_deliver(cfg, wf, &sc.ch, &pilots, seed)?;
    Ok(ls_estimate(&y, &pilots)?.h.transpose())
}

fn check_waveform(cfg: &ScenarioConfig) -> Result<WaveformConfig> {
    if cfg.preamble_length() % 4 != 0 {
        return Err(Error::Config {
            key: "scenario.preamble_length".into(),
            reason: "orthogonal pilots need a multiple of 4".into(),
        });
    }
    cfg.waveform.rrc()
}

/// Phase and magnitude mismatch between uplink and downlink estimates.
pub struct ReciprocityCompare;

impl Experiment for ReciprocityCompare {
    fn name(&self) -> &'static str {
        "reciprocity-compare"
    }

    fn description(&self) -> &'static str {
        "per-RRH phase and magnitude mismatch between uplink and downlink channel estimates, before and after calibration"
    }

    fn run_point(&self, cfg: &ScenarioConfig, seed: u64) -> Result<PointOutcome> {
        let wf = check_waveform(cfg)?;
        let mut seeds = SeedStream::new(seed);
        let sc = scene(cfg, seeds.next())?;
        let (h_ul, _, _) = uplink_phase(cfg, &wf, &sc, seeds.next())?;
        let h_dl = downlink_sounding(cfg, &wf, &sc, seeds.next())?;
        let cal = calibrate(cfg, &wf, &sc, seeds.next())?;
        let mut out = PointOutcome::default();
        // ratio of downlink to uplink, relative to RRH 1, for UE 1
        let ratio = |b: usize, c: Complex64| {
            (h_dl[(b, 0)] / h_dl[(0, 0)]) / (h_ul[(b, 0)] * c / h_ul[(0, 0)])
        };
        for b in 1..sc.ch.rrhs() {
            let raw = ratio(b, Complex64::new(1.0, 0.0));
            let calibrated = ratio(b, cal.matrix.c[b]);
            out = out
                .metric(
                    format!("phase_offset_rrh{}_deg", b + 1),
                    raw.arg().to_degrees(),
                )
                .metric(
                    format!("magnitude_offset_rrh{}_db", b + 1),
                    20.0 * raw.norm().log10(),
                )
                .metric(
                    format!("calibrated_phase_offset_rrh{}_deg", b + 1),
                    calibrated.arg().to_degrees(),
                )
                .metric(
                    format!("calibrated_magnitude_offset_rrh{}_db", b + 1),
                    20.0 * calibrated.norm().log10(),
                );
        }
        Ok(out)
    }
}

/// Over-the-air calibration accuracy against the simulated truth.
pub struct Calibrate;

impl Experiment for Calibrate {
    fn name(&self) -> &'static str {
        "calibrate"
    }

    fn description(&self) -> &'static str {
        "RRH-to-RRH sounding and calibration-matrix estimation, scored against the true transceiver gains"
    }

    fn run_point(&self, cfg: &ScenarioConfig, seed: u64) -> Result<PointOutcome> {
        let wf = check_waveform(cfg)?;
        let mut seeds = SeedStream::new(seed);
        let sc = scene(cfg, seeds.next())?;
        let est = calibrate(cfg, &wf, &sc, seeds.next())?;
        let q = calibration_quality(&sc.ch, &est.matrix)?;
        Ok(PointOutcome::default()
            .metric("max_phase_error_deg", q.max_phase_error_deg)
            .metric("max_magnitude_error_db", q.max_magnitude_error_db)
            .metric("max_relative_error", q.max_relative_error)
            .metric("cost", est.cost)
            .metric("iterations", est.iterations as f64))
    }
}

/// Downlink zero-forcing with the downlink estimate, the raw uplink
/// estimate, and the calibrated uplink estimate.
pub struct DmimoDownlink;

impl Experiment for DmimoDownlink {
    fn name(&self) -> &'static str {
        "dmimo-downlink"
    }

    fn description(&self) -> &'static str {
        "TDD round trip: per-UE downlink EVM with precoders from downlink pilots, raw uplink pilots and calibrated uplink pilots"
    }

    fn run_point(&self, cfg: &ScenarioConfig, seed: u64) -> Result<PointOutcome> {
        let wf = check_waveform(cfg)?;
        let mut seeds = SeedStream::new(seed);
        let sc = scene(cfg, seeds.next())?;
        let (b, u) = (sc.ch.rrhs(), sc.ch.ues());
        let budget = b as f64;

        let (h_ul, _, _) = uplink_phase(cfg, &wf, &sc, seeds.next())?;
        let h_dl = downlink_sounding(cfg, &wf, &sc, seeds.next())?;
        let cal = calibrate(cfg, &wf, &sc, seeds.next())?;

        let p_dl = zf_precoder(&h_dl, budget, None)?;
        let p_ul = zf_precoder(&h_ul, budget, None)?;
        let p_cal = apply_calibration(&p_ul, &cal.matrix)?;
        let precoders = [("pdl", &p_dl.p), ("pul", &p_ul.p), ("cal", &p_cal.p)];

        // the three precoded blocks go out back to back in one transmission
        let data = random_symbols(cfg, u, seeds.next());
        let n = data.ncols();
        let mut x = DMatrix::zeros(b, 3 * n);
        for (k, (_, p)) in precoders.iter().enumerate() {
            x.columns_mut(k * n, n).copy_from(&(*p * &data));
        }
        let y = downlink_deliver(cfg, &wf, &sc.ch, &x, seeds.next())?;

        let mut out = PointOutcome::default();
        for (k, (name, _)) in precoders.iter().enumerate() {
            let evms = row_evms(&y.columns(k * n, n).into_owned(), &data)?;
            for (ue, e) in evms.into_iter().enumerate() {
                out = out.metric(ue_metric("evm", ue, name), e);
            }
        }
        let constellation = y.columns(2 * n, n).row(0).iter().cloned().collect();
        Ok(out.with_constellation(constellation))
    }
}

/// Uplink zero-forcing combining.
pub struct DmimoUplink;

impl Experiment for DmimoUplink {
    fn name(&self) -> &'static str {
        "dmimo-uplink"
    }

    fn description(&self) -> &'static str {
        "per-UE uplink EVM after zero-forcing combining across RRHs"
    }

    fn run_point(&self, cfg: &ScenarioConfig, seed: u64) -> Result<PointOutcome> {
        let wf = check_waveform(cfg)?;
        let mut seeds = SeedStream::new(seed);
        let sc = scene(cfg, seeds.next())?;
        let (_, evms, first) = uplink_phase(cfg, &wf, &sc, seeds.next())?;
        let mut out = PointOutcome::default();
        for (ue, e) in evms.into_iter().enumerate() {
            out = out.metric(ue_metric("evm", ue, ""), e);
        }
        Ok(out.with_constellation(first))
    }
}
