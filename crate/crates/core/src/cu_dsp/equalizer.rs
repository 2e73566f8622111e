//! Symbol-spaced linear equalizer fitted directly to training symbols.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// `z[n] = sum_l taps[l] * rx[n + delay - l]`, with `rx` zero outside its
/// range.
#[derive(Debug, Clone, PartialEq)]
pub struct EqualizerTaps {
    pub taps: Vec<Complex64>,
    /// Decision delay in symbols, chosen during fitting.
    pub delay: usize,
}

impl EqualizerTaps {
    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// Equalizes `rx`; the output is aligned with the input.
    pub fn apply(&self, rx: &[Complex64]) -> Vec<Complex64> {
        (0..rx.len())
            .map(|n| {
                self.taps
                    .iter()
                    .enumerate()
                    .filter_map(|(l, w)| tap_input(rx, n, self.delay, l).map(|x| w * x))
                    .sum()
            })
            .collect()
    }
}

fn tap_input(rx: &[Complex64], n: usize, delay: usize, l: usize) -> Option<Complex64> {
    (n + delay).checked_sub(l).and_then(|i| rx.get(i)).copied()
}

/// Least-squares `L`-tap equalizer mapping `rx` onto `training` (both at one
/// sample per symbol and aligned).
pub fn fit_equalizer(
    rx: &[Complex64],
    training: &[Complex64],
    taps: usize,
) -> Result<EqualizerTaps> {
    if taps == 0 {
        return Err(Error::param("taps", "need at least one tap"));
    }
    if rx.len() != training.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} received symbols for {} training symbols",
            rx.len(),
            training.len()
        )));
    }
    if training.len() < 4 * taps {
        return Err(Error::param(
            "training",
            format!(
                "{} symbols is too short for {taps} taps (need {})",
                training.len(),
                4 * taps
            ),
        ));
    }
    // the best decision delay depends on where the channel's energy sits;
    // try each one and keep the smallest training error
    let target = DVector::from_column_slice(training);
    let mut best: Option<(f64, EqualizerTaps)> = None;
    for delay in 0..taps {
        let a = DMatrix::from_fn(rx.len(), taps, |n, l| {
            tap_input(rx, n, delay, l).unwrap_or_default()
        });
        let ah = a.adjoint();
        let Some(chol) = (&ah * &a).cholesky() else {
            continue;
        };
        let w = chol.solve(&(&ah * &target));
        if w.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            continue;
        }
        let err = (&a * &w - &target).norm_squared();
        if best.as_ref().is_none_or(|(e, _)| err < *e) {
            best = Some((
                err,
                EqualizerTaps {
                    taps: w.iter().copied().collect(),
                    delay,
                },
            ));
        }
    }
    best.map(|(_, eq)| eq)
        .ok_or_else(|| Error::Singular("equalizer normal equations are singular".into()))
}
