//! EVM metrology.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::modem::qam::Scheme;

/// Shortest frame an EVM is computed over.
pub const MIN_EVM_SYMBOLS: usize = 16;

/// RMS EVM in percent after fitting one complex gain:
/// `a = sum(ref^* rx) / sum|ref|^2`,
/// `EVM = 100 sqrt(sum|rx - a ref|^2 / sum|a ref|^2)`.
pub fn compute_evm(rx: &[Complex64], reference: &[Complex64]) -> Result<f64> {
    if rx.len() != reference.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} received symbols for {} reference symbols",
            rx.len(),
            reference.len()
        )));
    }
    if rx.len() < MIN_EVM_SYMBOLS {
        return Err(Error::param(
            "symbols",
            format!("need at least {MIN_EVM_SYMBOLS} symbols, got {}", rx.len()),
        ));
    }
    let ref_power: f64 = reference.iter().map(|v| v.norm_sqr()).sum();
    if ref_power <= 0.0 {
        return Err(Error::param("reference", "has zero power"));
    }
    let a: Complex64 = reference
        .iter()
        .zip(rx)
        .map(|(r, y)| r.conj() * y)
        .sum::<Complex64>()
        / ref_power;
    let fitted = a.norm_sqr() * ref_power;
    if fitted <= 0.0 {
        // nothing of the reference survived
        return Ok(f64::INFINITY);
    }
    let err: f64 = reference
        .iter()
        .zip(rx)
        .map(|(r, y)| (y - a * r).norm_sqr())
        .sum();
    Ok(100.0 * (err / fitted).sqrt())
}

/// EVM in dB, `20 log10(EVM% / 100)`.
pub fn evm_db(evm_percent: f64) -> f64 {
    20.0 * (evm_percent / 100.0).log10()
}

/// Whether an EVM meets the minimum requirement of its modulation.
pub fn meets_requirement(evm_percent: f64, scheme: Scheme) -> bool {
    evm_percent <= scheme.evm_requirement_percent()
}
