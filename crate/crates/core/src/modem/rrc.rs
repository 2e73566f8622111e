//! Root-raised-cosine single-carrier waveforms with preamble synchronization.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modem::qam::{Scheme, SymbolFrame};
use crate::sigcore::filter::{convolve_complex, convolve_complex_complex};
use crate::sigcore::signal::BasebandSignal;

/// Pulse span in symbols.
pub const RRC_SPAN: usize = 16;

/// Fraction of the pulse covered by the cosine taper (half at each end).
const TAPER_FRACTION: f64 = 0.5;

/// Correlation peaks below this normalized value count as "not found".
pub const SYNC_THRESHOLD: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveformConfig {
    pub scheme: Scheme,
    pub symbol_rate: f64,
    pub rolloff: f64,
    pub samples_per_symbol: usize,
}

impl WaveformConfig {
    pub fn new(
        scheme: Scheme,
        symbol_rate: f64,
        rolloff: f64,
        samples_per_symbol: usize,
    ) -> Result<Self> {
        let c = Self {
            scheme,
            symbol_rate,
            rolloff,
            samples_per_symbol,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.symbol_rate > 0.0 && self.symbol_rate.is_finite()) {
            return Err(Error::param("symbol_rate", "must be > 0"));
        }
        if !(0.0..=1.0).contains(&self.rolloff) {
            return Err(Error::param(
                "rolloff",
                format!("must be in [0, 1], got {}", self.rolloff),
            ));
        }
        if self.samples_per_symbol < 2 {
            return Err(Error::param("samples_per_symbol", "must be >= 2"));
        }
        Ok(())
    }

    /// Occupied bandwidth `R_s (1 + alpha)`.
    pub fn occupied_bandwidth(&self) -> f64 {
        self.symbol_rate * (1.0 + self.rolloff)
    }

    pub fn sample_rate(&self) -> f64 {
        self.symbol_rate * self.samples_per_symbol as f64
    }

    /// Pulse length in samples.
    pub fn pulse_len(&self) -> usize {
        RRC_SPAN * self.samples_per_symbol + 1
    }

    /// Delay of a transmit + matched filter cascade, in samples.
    pub fn cascade_delay(&self) -> usize {
        self.pulse_len() - 1
    }
}

fn rrc_value(t: f64, beta: f64) -> f64 {
    if t.abs() < 1e-12 {
        return 1.0 - beta + 4.0 * beta / PI;
    }
    if beta > 0.0 && ((4.0 * beta * t).abs() - 1.0).abs() < 1e-9 {
        let a = PI / (4.0 * beta);
        return beta / 2f64.sqrt() * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos());
    }
    ((PI * t * (1.0 - beta)).sin() + 4.0 * beta * t * (PI * t * (1.0 + beta)).cos())
        / (PI * t * (1.0 - (4.0 * beta * t).powi(2)))
}

/// Tapered RRC pulse, `span * sps + 1` taps, scaled so `sum g^2 = sps`
/// (unit-power symbols give a unit-power waveform).
pub fn rrc_taps(rolloff: f64, sps: usize, span: usize) -> Vec<f64> {
    let len = span * sps + 1;
    let c = (len - 1) as f64 / 2.0;
    let mut g: Vec<f64> = (0..len)
        .map(|n| {
            let t = (n as f64 - c) / sps as f64;
            let x = n as f64 / (len - 1) as f64;
            let r = TAPER_FRACTION;
            let w = if x < r / 2.0 {
                0.5 * (1.0 - (2.0 * PI * x / r).cos())
            } else if x > 1.0 - r / 2.0 {
                0.5 * (1.0 - (2.0 * PI * (1.0 - x) / r).cos())
            } else {
                1.0
            };
            rrc_value(t, rolloff) * w
        })
        .collect();
    for k in 0..len / 2 {
        g[len - 1 - k] = g[k];
    }
    let e: f64 = g.iter().map(|v| v * v).sum();
    let s = (sps as f64 / e).sqrt();
    g.iter_mut().for_each(|v| *v *= s);
    g
}

/// Pulse-shapes `symbols` at `sps` samples per symbol. The output is the full
/// convolution: `len * sps + span * sps` samples, first symbol peak at
/// `span * sps / 2`.
pub fn shape_symbols(symbols: &[Complex64], cfg: &WaveformConfig) -> Vec<Complex64> {
    let sps = cfg.samples_per_symbol;
    let g = rrc_taps(cfg.rolloff, sps, RRC_SPAN);
    let mut up = vec![Complex64::new(0.0, 0.0); symbols.len() * sps];
    for (i, s) in symbols.iter().enumerate() {
        up[i * sps] = *s;
    }
    if up.is_empty() {
        return up;
    }
    convolve_complex(&up, &g)
}

/// RRC modulation of a frame at `R_s * sps`.
pub fn rrc_modulate(frame: &SymbolFrame, cfg: &WaveformConfig) -> Result<BasebandSignal> {
    cfg.validate()?;
    Ok(BasebandSignal::from_raw(
        shape_symbols(&frame.symbols, cfg),
        cfg.sample_rate(),
        0.0,
    ))
}

/// Matched filter output (full convolution with `g / sps`).
pub fn matched_filter(x: &[Complex64], cfg: &WaveformConfig) -> Vec<Complex64> {
    let sps = cfg.samples_per_symbol;
    let g: Vec<f64> = rrc_taps(cfg.rolloff, sps, RRC_SPAN)
        .into_iter()
        .map(|v| v / sps as f64)
        .collect();
    if x.is_empty() {
        return Vec::new();
    }
    convolve_complex(x, &g)
}

/// Normalized correlation of `y[o + k*step]` against `reference`, in [0, 1].
fn correlation_metric(
    y: &[Complex64],
    o: usize,
    step: usize,
    reference: &[Complex64],
    ref_energy: f64,
) -> f64 {
    let mut c = Complex64::new(0.0, 0.0);
    let mut e = 0.0;
    for (k, r) in reference.iter().enumerate() {
        let v = y[o + k * step];
        c += v * r.conj();
        e += v.norm_sqr();
    }
    if e <= 0.0 {
        0.0
    } else {
        c.norm_sqr() / (e * ref_energy)
    }
}

/// Finds the sample offset in `y` (a matched-filter output) where the
/// symbol-spaced samples best match one or more known preambles. With several
/// preambles (one per transmitter) the metric is the sum of their normalized
/// correlations, so the common timing of a superposition is found.
pub fn find_preamble(
    y: &[Complex64],
    preambles: &[&[Complex64]],
    step: usize,
) -> Result<(usize, f64)> {
    let plen = preambles.iter().map(|p| p.len()).max().unwrap_or(0);
    if plen == 0 {
        return Err(Error::param("preamble", "empty preamble"));
    }
    let span = (plen - 1) * step + 1;
    if y.len() < span {
        return Err(Error::Synchronization(format!(
            "received {} samples, preamble needs {span}",
            y.len()
        )));
    }
    let energies: Vec<f64> = preambles
        .iter()
        .map(|p| p.iter().map(|v| v.norm_sqr()).sum())
        .collect();
    let mut best = (0usize, f64::MIN);
    for o in 0..=y.len() - span {
        let m: f64 = preambles
            .iter()
            .zip(&energies)
            .map(|(p, &e)| correlation_metric(y, o, step, p, e))
            .sum();
        if m > best.1 {
            best = (o, m);
        }
    }
    if best.1 < SYNC_THRESHOLD {
        return Err(Error::Synchronization(format!(
            "preamble correlation peak {:.3} below threshold {SYNC_THRESHOLD}",
            best.1
        )));
    }
    Ok(best)
}

/// How the demodulator chooses its symbol sampling instants.
#[derive(Debug, Clone, Copy)]
pub enum Timing<'a> {
    /// Sample offset of the first symbol in the matched-filter output.
    Fixed(usize),
    /// Search for this preamble (the first symbols of the burst).
    Preamble(&'a [Complex64]),
    /// Search for the common timing of several superposed preambles.
    Preambles(&'a [&'a [Complex64]]),
}

/// Matched filtering and symbol-instant decimation, returning `n_symbols`
/// symbols starting at the burst's first symbol.
pub fn rrc_demodulate(
    bb: &BasebandSignal,
    cfg: &WaveformConfig,
    timing: Timing<'_>,
    n_symbols: usize,
) -> Result<SymbolFrame> {
    cfg.validate()?;
    let ratio = bb.rate() / cfg.symbol_rate;
    if (ratio - cfg.samples_per_symbol as f64).abs() > 1e-9 * ratio {
        return Err(Error::param(
            "rate",
            format!(
                "input rate {} Hz is not {} samples per symbol at {} Bd",
                bb.rate(),
                cfg.samples_per_symbol,
                cfg.symbol_rate
            ),
        ));
    }
    let sps = cfg.samples_per_symbol;
    let y = matched_filter(bb.samples(), cfg);
    let start = match timing {
        Timing::Fixed(o) => o,
        Timing::Preamble(p) => find_preamble(&y, &[p], sps)?.0,
        Timing::Preambles(ps) => find_preamble(&y, ps, sps)?.0,
    };
    let last = start + n_symbols.saturating_sub(1) * sps;
    if n_symbols > 0 && last >= y.len() {
        return Err(Error::Synchronization(format!(
            "burst starting at sample {start} runs past the end of the {}-sample buffer",
            y.len()
        )));
    }
    let symbols = (0..n_symbols).map(|k| y[start + k * sps]).collect();
    Ok(SymbolFrame::new(symbols, cfg.scheme))
}

/// Symbol-spaced convolution helper used by tests and the equalizer.
pub fn symbol_convolve(x: &[Complex64], taps: &[Complex64]) -> Vec<Complex64> {
    convolve_complex_complex(x, taps)
}
