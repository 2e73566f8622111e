//! Link building blocks shared by the experiments: transmit bursts, the
//! 1-bit uplink and downlink paths (or their ideal linear stand-ins), the UE
//! receiver and symbol recovery.

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::ScenarioConfig;
use super::evm::compute_evm;
use crate::channel::complex_awgn;
use crate::cu_dsp::{fit_equalizer, ofdm_ls_estimate};
use crate::error::{Error, Result};
use crate::modem::ofdm::{ofdm_demodulate, ofdm_modulate, ofdm_pilot, OfdmConfig, OFDM_PILOT_ROOT};
use crate::modem::qam::{Scheme, SymbolFrame};
use crate::modem::random_frame;
use crate::modem::rrc::{rrc_demodulate, rrc_modulate, Timing, WaveformConfig};
use crate::modem::zc::zadoff_chu;
use crate::rrh::{downlink_rrh_chain, uplink_rrh_chain, FrontendConfig};
use crate::sigcore::fir::FilterSpec;
use crate::sigcore::mix::{downconvert, upconvert};
use crate::sigcore::power::{
    db_to_amplitude, mean_square, mean_square_complex, watts_to_dbm, REFERENCE_OHMS,
};
use crate::sigcore::signal::{BasebandSignal, PassbandSignal};
use crate::sigma_delta::{sdm_encode, FULL_SCALE_SINE_POWER};

/// Zadoff-Chu roots of the single-carrier preambles, one per transmitter.
pub const PREAMBLE_ROOTS: [u64; 4] = [25, 29, 31, 37];

/// Stopband attenuation of the CU channel-selection filters.
const CU_FILTER_ATTEN_DB: f64 = 60.0;

/// Independent sub-seeds derived from one point seed.
pub struct SeedStream(ChaCha8Rng);

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn next(&mut self) -> u64 {
        self.0.next_u64()
    }

    pub fn rng(&mut self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.next())
    }
}

/// A single-carrier burst: preamble followed by random data.
#[derive(Debug, Clone)]
pub struct Burst {
    pub symbols: Vec<Complex64>,
    pub preamble_length: usize,
    pub signal: BasebandSignal,
}

impl Burst {
    pub fn preamble(&self) -> &[Complex64] {
        &self.symbols[..self.preamble_length]
    }

    pub fn data(&self) -> &[Complex64] {
        &self.symbols[self.preamble_length..]
    }
}

/// Preamble of transmitter `index`.
pub fn preamble(index: usize, length: usize) -> Result<Vec<Complex64>> {
    zadoff_chu(PREAMBLE_ROOTS[index % PREAMBLE_ROOTS.len()], length)
}

/// Modulates `head` followed by `n_data` random symbols.
pub fn sc_burst<R: Rng + ?Sized>(
    rng: &mut R,
    wf: &WaveformConfig,
    head: &[Complex64],
    n_data: usize,
) -> Result<Burst> {
    let data = random_frame(rng, wf.scheme, n_data);
    let mut symbols = head.to_vec();
    symbols.extend_from_slice(&data.symbols);
    let signal = rrc_modulate(&SymbolFrame::new(symbols.clone(), wf.scheme), wf)?;
    Ok(Burst {
        symbols,
        preamble_length: head.len(),
        signal,
    })
}

/// Receiver front end for a signal occupying `occupied` Hz around the
/// carrier. Without the BPF the receiver is flat and the lumped noise covers
/// at least the signal band.
pub fn frontend_for(cfg: &ScenarioConfig, occupied: f64) -> FrontendConfig {
    let mut fe = cfg.frontend;
    if !fe.bpf_enabled {
        let width = (fe.noise_high - fe.noise_low).max(1.2 * occupied);
        let fc = cfg.scenario.carrier_frequency;
        fe.noise_low = fc - width / 2.0;
        fe.noise_high = fc + width / 2.0;
    }
    fe
}

/// Antenna waveform as seen by the CU, and the VGA gain the RRH applied.
pub struct UplinkCapture {
    /// CU-side waveform at the fronthaul rate.
    pub waveform: PassbandSignal,
    pub agc_gain_db: f64,
}

/// Uplink of one RRH. Hardware mode runs the 1-bit chain; ideal mode hands
/// the antenna waveform over unchanged.
pub fn uplink_capture(
    cfg: &ScenarioConfig,
    rf: &PassbandSignal,
    occupied: f64,
    seed: u64,
) -> Result<UplinkCapture> {
    if !cfg.scenario.hardware {
        return Ok(UplinkCapture {
            waveform: rf.clone(),
            agc_gain_db: 0.0,
        });
    }
    let fe = frontend_for(cfg, occupied);
    let out = uplink_rrh_chain(rf, &fe, &cfg.dither, &cfg.fronthaul, seed)?;
    let agc_gain_db = out.agc.first().map(|s| s.gain_db).unwrap_or(0.0);
    Ok(UplinkCapture {
        waveform: out.stream.to_passband(1.0),
        agc_gain_db,
    })
}

/// CU channel selection: mixes `fc` to baseband at `rate` keeping
/// `[-half_band, half_band]`.
pub fn cu_select(
    pb: &PassbandSignal,
    fc: f64,
    rate: f64,
    half_band: f64,
) -> Result<BasebandSignal> {
    let transition = (rate / 2.0 - half_band).min(half_band).max(rate * 0.01);
    let cutoff = half_band.min(rate / 2.0 - transition * 0.5);
    downconvert(
        pb,
        fc,
        rate,
        &FilterSpec::lowpass(cutoff, transition, CU_FILTER_ATTEN_DB),
    )
}

/// Channel-selection band of an RRC waveform.
pub fn sc_half_band(wf: &WaveformConfig) -> f64 {
    0.75 * wf.symbol_rate
}

/// Full uplink of a single-carrier baseband signal (already at its antenna
/// power) through one RRH, returning CU baseband with the VGA gain undone.
pub fn sc_uplink(
    cfg: &ScenarioConfig,
    wf: &WaveformConfig,
    bb: &BasebandSignal,
    seed: u64,
) -> Result<BasebandSignal> {
    if !cfg.scenario.hardware {
        return Ok(bb.clone());
    }
    let fc = cfg.scenario.carrier_frequency;
    let rf = upconvert(bb, fc, cfg.scenario.sample_rate)?;
    let cap = uplink_capture(cfg, &rf, wf.occupied_bandwidth(), seed)?;
    let y = cu_select(&cap.waveform, fc, wf.sample_rate(), sc_half_band(wf))?;
    Ok(y.scale(Complex64::new(1.0 / db_to_amplitude(cap.agc_gain_db), 0.0)))
}

/// CU downlink for several RRHs: sigma-delta encoding with one common
/// scale (the strongest RRH at the configured drive), the RRH transmitter
/// and back to baseband at the antenna. Ideal mode returns the inputs.
pub fn downlink_transmit(
    cfg: &ScenarioConfig,
    streams: &[BasebandSignal],
    half_band: f64,
    seed: u64,
) -> Result<Vec<BasebandSignal>> {
    if !cfg.scenario.hardware {
        return Ok(streams.to_vec());
    }
    let fs = cfg.scenario.sample_rate;
    let fc = cfg.scenario.carrier_frequency;
    let design = cfg.sdm.design(fc, fs)?;
    let rf: Vec<PassbandSignal> = streams
        .iter()
        .map(|s| upconvert(s, fc, fs))
        .collect::<Result<_>>()?;
    let strongest = rf
        .iter()
        .map(|x| mean_square(x.samples()))
        .fold(0.0, f64::max);
    if strongest <= 0.0 {
        return Err(Error::param("downlink", "all RRH streams are silent"));
    }
    let target = FULL_SCALE_SINE_POWER * 10f64.powf(cfg.sdm.drive_dbfs / 10.0);
    let g = (target / strongest).sqrt();
    let mut seeds = SeedStream::new(seed);
    rf.iter()
        .zip(streams)
        .map(|(x, s)| {
            let drive: Vec<f64> = x.samples().iter().map(|v| v * g).collect();
            let (bits, state) = sdm_encode(&drive, fs, &design)?;
            if state.overloads > 0 {
                log::warn!("downlink sigma-delta loop reset {} times", state.overloads);
            }
            let out = downlink_rrh_chain(&bits, &cfg.transmitter, &cfg.fronthaul, seeds.next())?;
            cu_select(&out, fc, s.rate(), half_band)
        })
        .collect()
}

/// UE receiver: automatic gain to the comparator-plane level of the RRHs
/// and the same lumped noise density. Ideal mode is transparent.
pub fn ue_receive(cfg: &ScenarioConfig, bb: &BasebandSignal, seed: u64) -> Result<BasebandSignal> {
    if !cfg.scenario.hardware || !cfg.frontend.noise_enabled {
        return Ok(bb.clone());
    }
    let fe = &cfg.frontend;
    let level = fe.agc_target_dbm + fe.rf_amp_gain_db;
    let y = bb.clone().with_power_dbm(level)?;
    let noise_dbm = fe.noise_dbm + 10.0 * (bb.rate() / fe.noise_reference_bandwidth).log10();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = complex_awgn(&mut rng, y.len(), noise_dbm);
    let fc = y.center_frequency();
    let rate = y.rate();
    let samples = y
        .into_samples()
        .into_iter()
        .zip(n)
        .map(|(a, b)| a + b)
        .collect();
    BasebandSignal::new(samples, rate, fc)
}

/// Symbols at the known burst timing (all paths are delay compensated).
pub fn sc_symbols_fixed(
    bb: &BasebandSignal,
    wf: &WaveformConfig,
    n: usize,
) -> Result<Vec<Complex64>> {
    Ok(rrc_demodulate(bb, wf, Timing::Fixed(wf.cascade_delay()), n)?.symbols)
}

/// Symbols located by the burst's own preamble.
pub fn sc_symbols_sync(
    bb: &BasebandSignal,
    wf: &WaveformConfig,
    pre: &[Complex64],
    n: usize,
) -> Result<Vec<Complex64>> {
    Ok(rrc_demodulate(bb, wf, Timing::Preamble(pre), n)?.symbols)
}

/// Equalizes (when `taps > 0`, trained on the known burst) and scores the
/// data part. Returns the EVM and the equalized data symbols.
pub fn score_burst(
    rx: &[Complex64],
    burst_symbols: &[Complex64],
    preamble_length: usize,
    taps: usize,
) -> Result<(f64, Vec<Complex64>)> {
    let eq = if taps > 0 {
        fit_equalizer(rx, burst_symbols, taps)?.apply(rx)
    } else {
        rx.to_vec()
    };
    let data = eq[preamble_length..].to_vec();
    Ok((compute_evm(&data, &burst_symbols[preamble_length..])?, data))
}

/// Sets a baseband waveform's average power.
pub fn at_power(bb: BasebandSignal, dbm: f64) -> Result<BasebandSignal> {
    bb.with_power_dbm(dbm)
}

/// Average power of a complex baseband buffer, dBm.
pub fn power_dbm(x: &[Complex64]) -> f64 {
    watts_to_dbm(mean_square_complex(x) / REFERENCE_OHMS)
}

/// OFDM numerology for a target occupied bandwidth: the configured spacing,
/// a power-of-two FFT keeping the band within 60% of the sample rate and
/// the configured cyclic-prefix fraction.
pub fn ofdm_for_bandwidth(base: &OfdmConfig, occupied: f64) -> Result<OfdmConfig> {
    let n_occ = ((occupied / base.subcarrier_spacing).round() as usize).max(2);
    let fft_size = ((n_occ as f64 / 0.6).ceil() as usize)
        .next_power_of_two()
        .max(64);
    let cp_fraction = base.cyclic_prefix_length as f64 / base.fft_size as f64;
    let cfg = OfdmConfig {
        subcarrier_spacing: base.subcarrier_spacing,
        fft_size,
        cyclic_prefix_length: (cp_fraction * fft_size as f64).round() as usize,
        occupied_subcarriers: n_occ,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// An OFDM uplink frame: one pilot symbol followed by data symbols, with a
/// guard of silence in front so the receiver can open its FFT window early.
pub struct OfdmFrame {
    pub cfg: OfdmConfig,
    pub pilot: Vec<Complex64>,
    pub data: Vec<Complex64>,
    pub guard: usize,
    pub signal: BasebandSignal,
}

pub fn ofdm_frame<R: Rng + ?Sized>(
    rng: &mut R,
    cfg: &OfdmConfig,
    scheme: Scheme,
    n_data_min: usize,
    n_symbols: usize,
) -> Result<OfdmFrame> {
    let n_occ = cfg.occupied_subcarriers;
    let n_sym = if n_symbols > 0 {
        n_symbols
    } else {
        n_data_min.div_ceil(n_occ).max(2)
    };
    let pilot = ofdm_pilot(cfg, OFDM_PILOT_ROOT)?;
    let data = random_frame(rng, scheme, n_sym * n_occ).symbols;
    let mut all = pilot.clone();
    all.extend_from_slice(&data);
    let body = ofdm_modulate(&all, cfg)?;
    let guard = cfg.cyclic_prefix_length;
    let mut samples = vec![Complex64::new(0.0, 0.0); guard];
    samples.extend_from_slice(body.samples());
    samples.extend(std::iter::repeat_n(Complex64::new(0.0, 0.0), guard));
    Ok(OfdmFrame {
        cfg: *cfg,
        pilot,
        data,
        guard,
        signal: BasebandSignal::new(samples, body.rate(), 0.0)?,
    })
}

/// Demodulates an OFDM frame, estimates the channel from the pilot symbol
/// with a `window`-sample delay support, equalizes every subcarrier and
/// returns the EVM and the equalized data.
pub fn ofdm_receive(
    frame: &OfdmFrame,
    rx: &BasebandSignal,
    window: usize,
) -> Result<(f64, Vec<Complex64>)> {
    let cfg = &frame.cfg;
    let n_sym = 1 + frame.data.len() / cfg.occupied_subcarriers;
    // open the FFT early so the channel's main tap sits mid-way through
    // the estimator's delay window, leaving room for precursors
    let advance = (window / 2).min(cfg.cyclic_prefix_length).min(frame.guard);
    let symbols = ofdm_demodulate(rx, cfg, frame.guard - advance, n_sym)?;
    let est = ofdm_ls_estimate(&symbols[0], &frame.pilot, cfg, window)?;
    let eq: Vec<Complex64> = symbols[1..]
        .iter()
        .flat_map(|s| s.iter().zip(&est.h).map(|(y, h)| y / h).collect::<Vec<_>>())
        .collect();
    Ok((compute_evm(&eq, &frame.data)?, eq))
}

/// Uplink of an OFDM frame through one RRH.
pub fn ofdm_uplink(
    cfg: &ScenarioConfig,
    frame: &OfdmFrame,
    power_dbm: f64,
    seed: u64,
) -> Result<BasebandSignal> {
    let fc = cfg.scenario.carrier_frequency;
    let occupied = frame.cfg.occupied_bandwidth();
    let bb = frame.signal.clone().with_power_dbm(power_dbm)?;
    let rf = upconvert(&bb, fc, cfg.scenario.sample_rate)?;
    let cap = uplink_capture(cfg, &rf, occupied, seed)?;
    cu_select(
        &cap.waveform,
        fc,
        frame.cfg.sample_rate(),
        0.5 * occupied * 1.02,
    )
}
