//! Zadoff-Chu sequences and orthogonal pilot sets.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sigcore::resample::gcd;

/// Zadoff-Chu sequence `exp(-j pi u n (n + 1) / N)` for odd `N`, and
/// `exp(-j pi u n^2 / N)` for even `N`.
pub fn zadoff_chu(root: u64, length: usize) -> Result<Vec<Complex64>> {
    if length == 0 {
        return Err(Error::param("length", "must be >= 1"));
    }
    if root == 0 || gcd(root, length as u64) != 1 {
        return Err(Error::param(
            "root",
            format!("root {root} must be coprime with length {length}"),
        ));
    }
    let n_len = length as u128;
    let odd = length % 2 == 1;
    Ok((0..length as u128)
        .map(|n| {
            // reduce u*n*(n+c) modulo 2N in integers so the phase is exact
            let q = if odd { n * (n + 1) } else { n * n };
            let r = (root as u128 * q) % (2 * n_len);
            Complex64::from_polar(1.0, -PI * r as f64 / length as f64)
        })
        .collect())
}

/// Length-4 Hadamard rows.
const HADAMARD4: [[f64; 4]; 4] = [
    [1.0, 1.0, 1.0, 1.0],
    [1.0, -1.0, 1.0, -1.0],
    [1.0, 1.0, -1.0, -1.0],
    [1.0, -1.0, -1.0, 1.0],
];

/// Default pilot length and root used for single-carrier preambles.
pub const PILOT_LENGTH: usize = 64;
pub const PILOT_ROOT: u64 = 25;

/// Up to four mutually orthogonal unit-modulus pilots: a Zadoff-Chu base
/// sequence covered by Hadamard rows (`p_u[n] = h_u[n mod 4] * zc[n]`).
pub fn orthogonal_pilots(count: usize, length: usize, root: u64) -> Result<Vec<Vec<Complex64>>> {
    if count == 0 || count > 4 {
        return Err(Error::param(
            "count",
            format!("1..=4 orthogonal pilots supported, got {count}"),
        ));
    }
    if length % 4 != 0 {
        return Err(Error::param(
            "length",
            "pilot length must be a multiple of 4",
        ));
    }
    let base = zadoff_chu(root, length)?;
    Ok((0..count)
        .map(|u| {
            base.iter()
                .enumerate()
                .map(|(n, z)| z * HADAMARD4[u][n % 4])
                .collect()
        })
        .collect())
}
