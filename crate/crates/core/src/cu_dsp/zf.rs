//! Zero-forcing precoding and combining.
//!
//! Estimates are stored in uplink orientation, `H_hat` being receivers
//! (RRHs) x transmitters (UEs). For the downlink the propagation is
//! `H_hat^T`, so `P = H_hat^* (H_hat^T H_hat^*)^-1` gives `H_hat^T P = I`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::gram_inverse;
use crate::calibration::CalibrationMatrix;
use crate::error::{Error, Result};

/// Precoder normalized to a sum-power budget for unit-power UE streams.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecodeMatrix {
    /// Normalized precoder, RRHs x UEs.
    pub p: DMatrix<Complex64>,
    /// Factor applied to the zero-forcing solution to meet the budget.
    pub scale: f64,
    /// Sum of per-RRH powers `||p||_F^2`.
    pub total_power: f64,
    /// Per-RRH limit that was checked, if any.
    pub per_rrh_cap: Option<f64>,
}

impl PrecodeMatrix {
    fn normalize(
        raw: DMatrix<Complex64>,
        total_power: f64,
        per_rrh_cap: Option<f64>,
    ) -> Result<Self> {
        if !(total_power > 0.0 && total_power.is_finite()) {
            return Err(Error::param("total_power", "must be finite and > 0"));
        }
        let norm2 = raw.norm_squared();
        if !(norm2 > 0.0 && norm2.is_finite()) {
            return Err(Error::Singular("precoder has no finite energy".into()));
        }
        let scale = (total_power / norm2).sqrt();
        let p = raw * Complex64::new(scale, 0.0);
        let out = Self {
            p,
            scale,
            total_power,
            per_rrh_cap,
        };
        if let Some(cap) = per_rrh_cap {
            for (b, pw) in out.rrh_powers().iter().enumerate() {
                if *pw > cap * (1.0 + 1e-12) {
                    log::warn!("RRH {b} transmits {pw:.4} against a cap of {cap:.4} after sum-power normalization");
                }
            }
        }
        Ok(out)
    }

    /// The zero-forcing solution before power normalization.
    pub fn unnormalized(&self) -> DMatrix<Complex64> {
        &self.p / Complex64::new(self.scale, 0.0)
    }

    /// Transmit power of each RRH for unit-power streams.
    pub fn rrh_powers(&self) -> Vec<f64> {
        self.p.row_iter().map(|r| r.norm_squared()).collect()
    }

    pub fn rrhs(&self) -> usize {
        self.p.nrows()
    }

    pub fn ues(&self) -> usize {
        self.p.ncols()
    }
}

fn check_shape(h: &DMatrix<Complex64>) -> Result<()> {
    let (b, u) = h.shape();
    if u == 0 || b < u {
        return Err(Error::DimensionMismatch(format!(
            "zero forcing needs at least as many RRHs as UEs, got {b} x {u}"
        )));
    }
    Ok(())
}

/// `P = H_hat^* (H_hat^T H_hat^*)^-1`, scaled to `total_power`. A violated
/// per-RRH cap is logged, not enforced.
pub fn zf_precoder(
    h: &DMatrix<Complex64>,
    total_power: f64,
    per_rrh_cap: Option<f64>,
) -> Result<PrecodeMatrix> {
    check_shape(h)?;
    let hc = h.conjugate();
    // (H^T H^*)^-1 = ((H^*)^H H^*)^-1
    let raw = &hc * gram_inverse(&hc, "channel estimate")?;
    PrecodeMatrix::normalize(raw, total_power, per_rrh_cap)
}

/// `W = (H_hat^H H_hat)^-1 H_hat^H` (UEs x RRHs), so that `W H_hat = I`.
pub fn zf_combiner(h: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    check_shape(h)?;
    Ok(gram_inverse(h, "channel estimate")? * h.adjoint())
}

/// `C^-1 P`, renormalized to the original budget.
pub fn apply_calibration(p: &PrecodeMatrix, c: &CalibrationMatrix) -> Result<PrecodeMatrix> {
    if c.len() != p.rrhs() {
        return Err(Error::DimensionMismatch(format!(
            "calibration for {} RRHs, precoder for {}",
            c.len(),
            p.rrhs()
        )));
    }
    let c = CalibrationMatrix::new(c.c.clone())?;
    PrecodeMatrix::normalize(
        c.inverse_matrix() * p.unnormalized(),
        p.total_power,
        p.per_rrh_cap,
    )
}
