//! Least-squares channel estimation from known pilots.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::gram_inverse;
use crate::error::{Error, Result};
use crate::modem::ofdm::OfdmConfig;

/// Flat-channel estimate `H_hat` (receivers x transmitters).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate {
    pub h: DMatrix<Complex64>,
    /// Received pilot power over residual power, dB; infinite when the
    /// pilots fit exactly.
    pub pilot_snr_db: f64,
}

impl ChannelEstimate {
    pub fn new(h: DMatrix<Complex64>) -> Self {
        Self {
            h,
            pilot_snr_db: f64::INFINITY,
        }
    }

    pub fn receivers(&self) -> usize {
        self.h.nrows()
    }

    pub fn transmitters(&self) -> usize {
        self.h.ncols()
    }
}

/// `H_hat = Y P^H (P P^H)^-1` where each row of `pilots` is one transmitter's
/// pilot and each row of `rx` one receiver's observation of them.
pub fn ls_estimate(
    rx: &DMatrix<Complex64>,
    pilots: &DMatrix<Complex64>,
) -> Result<ChannelEstimate> {
    let (u, n) = pilots.shape();
    if rx.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} received samples per receiver for pilots of length {n}",
            rx.ncols()
        )));
    }
    if u == 0 || n < u {
        return Err(Error::Singular(format!(
            "{u} pilots of length {n} cannot be independent"
        )));
    }
    // (P P^H)^-1 = gram_inverse(P^H)
    let inv = gram_inverse(&pilots.adjoint(), "pilot matrix")?;
    let h = rx * pilots.adjoint() * inv;
    let fit = &h * pilots;
    let residual = (rx - &fit).norm_squared();
    let signal = fit.norm_squared();
    let pilot_snr_db = if residual <= 1e-24 * signal {
        f64::INFINITY
    } else {
        // residual keeps n - u of n degrees of freedom per receiver
        let noise = residual / (n - u).max(1) as f64;
        let sig = (signal - noise * u as f64).max(0.0) / n as f64;
        10.0 * (sig / noise).log10()
    };
    Ok(ChannelEstimate { h, pilot_snr_db })
}

/// Relative singular-value floor of the delay-window basis.
const SVD_TOLERANCE: f64 = 1e-6;

/// Per-subcarrier estimate of one OFDM link.
#[derive(Debug, Clone, PartialEq)]
pub struct OfdmEstimate {
    /// Smoothed response on the occupied subcarriers, in allocation order.
    pub h: Vec<Complex64>,
    /// Raw per-subcarrier division `rx / pilot`.
    pub raw: Vec<Complex64>,
    /// Impulse response on delays `0..window`.
    pub taps: Vec<Complex64>,
}

/// Per-subcarrier LS estimate restricted to impulse responses that fit in
/// the first `delay_window` samples.
///
/// The raw ratios `rx / pilot` are projected, in the least-squares sense,
/// onto responses `sum_{d < window} g_d e^{-j 2 pi k d / N}` over the
/// occupied bins `k`. With every bin occupied this is exactly "IFFT, zero
/// the taps outside the window, FFT"; with guard bands it avoids the
/// leakage that hard windowing would cause. The noise on the estimate drops
/// by `occupied / rank`, where the rank is `window` unless the guard bands
/// make some delay modes unresolvable.
pub fn ofdm_ls_estimate(
    rx: &[Complex64],
    pilot: &[Complex64],
    cfg: &OfdmConfig,
    delay_window: usize,
) -> Result<OfdmEstimate> {
    cfg.validate()?;
    let bins = cfg.subcarrier_bins();
    let n_occ = bins.len();
    if rx.len() != n_occ || pilot.len() != n_occ {
        return Err(Error::DimensionMismatch(format!(
            "{} received and {} pilot subcarriers for {n_occ} occupied",
            rx.len(),
            pilot.len()
        )));
    }
    if delay_window == 0 || delay_window > cfg.fft_size {
        return Err(Error::param(
            "delay_window",
            format!("must be in 1..={}, got {delay_window}", cfg.fft_size),
        ));
    }
    if delay_window > n_occ {
        return Err(Error::param(
            "delay_window",
            format!("{delay_window} taps cannot be resolved from {n_occ} subcarriers"),
        ));
    }
    if let Some(k) = pilot.iter().position(|p| p.norm() == 0.0) {
        return Err(Error::param(
            "pilot",
            format!("subcarrier {k} carries no pilot"),
        ));
    }
    let raw: Vec<Complex64> = rx.iter().zip(pilot).map(|(r, p)| r / p).collect();
    let nfft = cfg.fft_size as f64;
    let basis = DMatrix::from_fn(n_occ, delay_window, |k, d| {
        Complex64::from_polar(1.0, -std::f64::consts::TAU * (bins[k] * d) as f64 / nfft)
    });
    // With guard bands some delay-domain modes are barely observable; the
    // truncated SVD keeps only resolvable ones, so the smoothing stays an
    // orthogonal projection and never amplifies noise.
    let svd = basis.svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => {
            return Err(Error::Singular(
                "delay-window basis decomposition failed".into(),
            ))
        }
    };
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let y = DVector::from_column_slice(&raw);
    let mut h = DVector::zeros(n_occ);
    let mut taps = DVector::zeros(delay_window);
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s <= SVD_TOLERANCE * smax {
            continue;
        }
        let ui = u.column(i);
        let coef = (ui.adjoint() * &y)[(0, 0)];
        h += ui * coef;
        taps += v_t.row(i).adjoint() * (coef / s);
    }
    Ok(OfdmEstimate {
        h: h.iter().copied().collect(),
        raw,
        taps: taps.iter().copied().collect(),
    })
}
