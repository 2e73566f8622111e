//! Central-unit digital processing: least-squares channel estimation,
//! symbol-spaced equalization and zero-forcing precoding/combining.

pub mod equalizer;
pub mod estimate;
pub mod zf;

pub use equalizer::{fit_equalizer, EqualizerTaps};
pub use estimate::{ls_estimate, ofdm_ls_estimate, ChannelEstimate, OfdmEstimate};
pub use zf::{apply_calibration, zf_combiner, zf_precoder, PrecodeMatrix};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Condition-number limit (of the Gram matrix) beyond which a matrix is
/// treated as rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// `(A^H A)^-1` for a tall matrix, rejecting rank-deficient input.
pub(crate) fn gram_inverse(a: &DMatrix<Complex64>, what: &str) -> Result<DMatrix<Complex64>> {
    let gram = a.adjoint() * a;
    let eig = gram.clone().symmetric_eigen();
    let max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let min = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if !(max > 0.0) || min <= RANK_TOLERANCE * max {
        return Err(Error::Singular(format!("{what} is rank deficient")));
    }
    gram.cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| Error::Singular(format!("{what} is rank deficient")))
}
