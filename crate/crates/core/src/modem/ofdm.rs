//! CP-OFDM with a centred subcarrier allocation and an unused DC bin.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modem::zc::zadoff_chu;
use crate::sigcore::signal::BasebandSignal;

/// Default Zadoff-Chu root for the OFDM pilot symbol.
pub const OFDM_PILOT_ROOT: u64 = 25;

/// CP-correlation peaks below this value mean no OFDM symbol boundary was
/// found at all.
const CP_SYNC_THRESHOLD: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OfdmConfig {
    pub subcarrier_spacing: f64,
    pub fft_size: usize,
    pub cyclic_prefix_length: usize,
    pub occupied_subcarriers: usize,
}

impl Default for OfdmConfig {
    fn default() -> Self {
        Self {
            subcarrier_spacing: 60e3,
            fft_size: 2048,
            cyclic_prefix_length: 144,
            occupied_subcarriers: 1000,
        }
    }
}

impl OfdmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.subcarrier_spacing > 0.0) {
            return Err(Error::param("subcarrier_spacing", "must be > 0"));
        }
        if self.fft_size < 4 {
            return Err(Error::param("fft_size", "must be >= 4"));
        }
        if self.occupied_subcarriers == 0 || self.occupied_subcarriers >= self.fft_size {
            return Err(Error::param(
                "occupied_subcarriers",
                format!(
                    "must be in 1..{}, got {}",
                    self.fft_size, self.occupied_subcarriers
                ),
            ));
        }
        if self.cyclic_prefix_length >= self.fft_size {
            return Err(Error::param(
                "cyclic_prefix_length",
                "must be shorter than the FFT",
            ));
        }
        Ok(())
    }

    /// Baseband sample rate `spacing * fft_size`.
    pub fn sample_rate(&self) -> f64 {
        self.subcarrier_spacing * self.fft_size as f64
    }

    /// Useful symbol duration (without CP), `1 / spacing`.
    pub fn symbol_duration(&self) -> f64 {
        self.fft_size as f64 / self.sample_rate()
    }

    pub fn symbol_len(&self) -> usize {
        self.fft_size + self.cyclic_prefix_length
    }

    /// Occupied bandwidth `occupied * spacing`.
    pub fn occupied_bandwidth(&self) -> f64 {
        self.occupied_subcarriers as f64 * self.subcarrier_spacing
    }

    /// Signed subcarrier indices in use, ascending; DC is skipped.
    pub fn subcarrier_indices(&self) -> Vec<i64> {
        let n = self.occupied_subcarriers as i64;
        let neg = n / 2;
        let pos = n - neg;
        (-neg..0).chain(1..=pos).collect()
    }

    /// FFT bins of [`subcarrier_indices`](Self::subcarrier_indices).
    pub fn subcarrier_bins(&self) -> Vec<usize> {
        let n = self.fft_size as i64;
        self.subcarrier_indices()
            .into_iter()
            .map(|k| k.rem_euclid(n) as usize)
            .collect()
    }
}

/// Pilot symbol values on every occupied subcarrier: a prime-length
/// Zadoff-Chu sequence extended cyclically.
pub fn ofdm_pilot(cfg: &OfdmConfig, root: u64) -> Result<Vec<Complex64>> {
    cfg.validate()?;
    let n = cfg.occupied_subcarriers;
    let is_prime = |m: usize| m >= 2 && (2..).take_while(|d| d * d <= m).all(|d| m % d != 0);
    let mut nzc = n;
    while nzc > 1 && !(is_prime(nzc) && root % nzc as u64 != 0) {
        nzc -= 1;
    }
    let base = zadoff_chu(root, nzc)?;
    Ok((0..n).map(|i| base[i % base.len()]).collect())
}

/// IFFT + CP per OFDM symbol. Output has unit average power for unit-power
/// symbols.
pub fn ofdm_modulate(symbols: &[Complex64], cfg: &OfdmConfig) -> Result<BasebandSignal> {
    cfg.validate()?;
    let n_occ = cfg.occupied_subcarriers;
    if symbols.len() % n_occ != 0 {
        return Err(Error::param(
            "symbols",
            format!(
                "{} symbols is not a multiple of {n_occ} subcarriers",
                symbols.len()
            ),
        ));
    }
    let n = cfg.fft_size;
    let cp = cfg.cyclic_prefix_length;
    let bins = cfg.subcarrier_bins();
    let ifft = FftPlanner::<f64>::new().plan_fft_inverse(n);
    let scale = 1.0 / (n_occ as f64).sqrt();
    let mut out = Vec::with_capacity(symbols.len() / n_occ * cfg.symbol_len());
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for chunk in symbols.chunks(n_occ) {
        buf.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for (b, s) in bins.iter().zip(chunk) {
            buf[*b] = s * scale;
        }
        ifft.process(&mut buf);
        out.extend_from_slice(&buf[n - cp..]);
        out.extend_from_slice(&buf);
    }
    Ok(BasebandSignal::from_raw(out, cfg.sample_rate(), 0.0))
}

/// Normalized CP correlation of the symbol whose CP starts at `t`.
fn cp_metric(x: &[Complex64], t: usize, cfg: &OfdmConfig) -> f64 {
    let (n, cp) = (cfg.fft_size, cfg.cyclic_prefix_length);
    if cp == 0 || t + n + cp > x.len() {
        return 0.0;
    }
    let (mut c, mut e1, mut e2) = (Complex64::new(0.0, 0.0), 0.0, 0.0);
    for i in 0..cp {
        let a = x[t + i];
        let b = x[t + i + n];
        c += a * b.conj();
        e1 += a.norm_sqr();
        e2 += b.norm_sqr();
    }
    if e1 <= 0.0 || e2 <= 0.0 {
        0.0
    } else {
        c.norm() / (e1 * e2).sqrt()
    }
}

/// Estimates where the CP of the OFDM symbol nearest `start` begins by
/// maximizing the CP correlation averaged over the symbols of the frame.
pub fn cp_timing(
    x: &[Complex64],
    start: usize,
    n_symbols: usize,
    cfg: &OfdmConfig,
) -> Option<(usize, f64)> {
    let sl = cfg.symbol_len();
    let lo = start.saturating_sub(sl / 2);
    let hi = start + sl / 2;
    let mut best: Option<(usize, f64)> = None;
    for t in lo..=hi {
        let mut m = 0.0;
        let mut k = 0;
        for s in 0..n_symbols.max(1) {
            let ts = t + s * sl;
            if ts + sl > x.len() {
                break;
            }
            m += cp_metric(x, ts, cfg);
            k += 1;
        }
        if k == 0 {
            continue;
        }
        let m = m / k as f64;
        if best.is_none_or(|b| m > b.1) {
            best = Some((t, m));
        }
    }
    best
}

/// Removes the CP and returns the occupied subcarriers of `n_symbols` OFDM
/// symbols, the first starting (CP included) at sample `start`.
///
/// The frame alignment is checked with the CP correlation: if the symbol
/// boundary it finds is not within one CP length after `start`, the FFT
/// window would straddle two symbols and a synchronization error is
/// returned.
pub fn ofdm_demodulate(
    bb: &BasebandSignal,
    cfg: &OfdmConfig,
    start: usize,
    n_symbols: usize,
) -> Result<Vec<Vec<Complex64>>> {
    cfg.validate()?;
    let x = bb.samples();
    let (n, cp, sl) = (cfg.fft_size, cfg.cyclic_prefix_length, cfg.symbol_len());
    if start + n_symbols * sl > x.len() {
        return Err(Error::Synchronization(format!(
            "{n_symbols} OFDM symbols from sample {start} exceed the {}-sample buffer",
            x.len()
        )));
    }
    if cp > 0 && n_symbols > 0 {
        let (t, m) = cp_timing(x, start, n_symbols, cfg).unwrap_or((start, 0.0));
        if m < CP_SYNC_THRESHOLD {
            return Err(Error::Synchronization(format!(
                "no cyclic-prefix correlation near sample {start} (peak {m:.3})"
            )));
        }
        // perfect correlation at `start` as well as at the peak means the
        // waveform is periodic (e.g. a single tone): the boundary is then
        // unobservable and any window is as good as another
        let flat = cp_metric(x, start, cfg) > 0.999 && m > 0.999;
        if !flat && !(t >= start && t - start <= cp) {
            return Err(Error::Synchronization(format!(
                "FFT window at sample {start} is misaligned: symbol boundary found at {t}, tolerance is {cp} samples"
            )));
        }
    }
    let bins = cfg.subcarrier_bins();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let scale = (cfg.occupied_subcarriers as f64).sqrt() / n as f64;
    let mut out = Vec::with_capacity(n_symbols);
    for s in 0..n_symbols {
        let w0 = start + s * sl + cp;
        let mut buf: Vec<Complex64> = x[w0..w0 + n].to_vec();
        fft.process(&mut buf);
        out.push(bins.iter().map(|&b| buf[b] * scale).collect());
    }
    Ok(out)
}
