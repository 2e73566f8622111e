//! Over-the-air reciprocity calibration among RRHs.
//!
//! Every RRH in turn transmits a pilot while all others listen, giving
//! `Y[i, j] = r_i h_ij t_j` for the symmetric RRH-to-RRH propagation `h`.
//! With `c = t / r` every pair satisfies `c_i Y[i, j] = c_j Y[j, i]`, so `c`
//! is found, up to one complex scalar, by minimizing
//! `sum_{i<j} |c_i Y[i, j] - c_j Y[j, i]|^2` on the sphere `||c|| = sqrt(B)`.
//! The minimizer is the smallest eigenvector of the Hermitian form; a
//! projected gradient descent then refines it. The result is normalized to
//! `c[0] = 1`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{complex_awgn, ChannelState, NoiseConfig};
use crate::error::{Error, Result};

/// `Y[i, j]`: what RRH `i` measures when RRH `j` transmits. The diagonal is
/// not used.
#[derive(Debug, Clone, PartialEq)]
pub struct SoundingMatrix {
    pub y: DMatrix<Complex64>,
}

impl SoundingMatrix {
    pub fn new(y: DMatrix<Complex64>) -> Result<Self> {
        if !y.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "sounding matrix is {}x{}",
                y.nrows(),
                y.ncols()
            )));
        }
        for i in 0..y.nrows() {
            for j in 0..y.ncols() {
                if i != j && !(y[(i, j)].re.is_finite() && y[(i, j)].im.is_finite()) {
                    return Err(Error::param(
                        "sounding",
                        format!("entry ({i}, {j}) is not finite"),
                    ));
                }
            }
        }
        Ok(Self { y })
    }

    pub fn rrhs(&self) -> usize {
        self.y.nrows()
    }
}

/// Diagonal calibration matrix `C = T_RRH R_RRH^-1`, stored as its diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationMatrix {
    pub c: DVector<Complex64>,
}

impl CalibrationMatrix {
    /// Wraps a diagonal, rejecting zero entries.
    pub fn new(c: DVector<Complex64>) -> Result<Self> {
        if let Some(i) = c
            .iter()
            .position(|v| v.norm() == 0.0 || !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::Singular(format!(
                "calibration entry {i} is zero or not finite"
            )));
        }
        Ok(Self { c })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            c: DVector::from_element(n, Complex64::new(1.0, 0.0)),
        }
    }

    /// The same matrix scaled so that `c[0] = 1`.
    pub fn normalized(&self) -> Result<Self> {
        let c0 = self.c[0];
        if c0.norm() == 0.0 {
            return Err(Error::Singular("c[0] is zero".into()));
        }
        Self::new(self.c.map(|v| v / c0))
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    /// `C^-1` as a dense diagonal matrix.
    pub fn inverse_matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_diagonal(&self.c.map(|v| Complex64::new(1.0, 0.0) / v))
    }
}

/// Runs every directed RRH-to-RRH pilot transmission.
///
/// `inter` is the symmetric propagation between RRHs; the transceiver gains
/// come from `ch`. Each entry is the least-squares gain of the received
/// pilot, with receiver noise from `noise` (one stream per directed link).
pub fn simulate_sounding(
    ch: &ChannelState,
    inter: &DMatrix<Complex64>,
    pilot: &[Complex64],
    noise: &NoiseConfig,
) -> Result<SoundingMatrix> {
    let b = ch.rrhs();
    if b < 2 {
        return Err(Error::param("rrhs", "calibration needs at least two RRHs"));
    }
    if inter.shape() != (b, b) {
        return Err(Error::DimensionMismatch(format!(
            "inter-RRH matrix is {}x{}, expected {b}x{b}",
            inter.nrows(),
            inter.ncols()
        )));
    }
    let scale = inter.iter().map(|v| v.norm()).fold(0.0, f64::max);
    for i in 0..b {
        for j in i + 1..b {
            if (inter[(i, j)] - inter[(j, i)]).norm() > 1e-12 * scale {
                return Err(Error::param(
                    "inter",
                    format!("RRH-to-RRH propagation must be symmetric; ({i}, {j}) differs"),
                ));
            }
        }
    }
    let energy: f64 = pilot.iter().map(|v| v.norm_sqr()).sum();
    if energy <= 0.0 {
        return Err(Error::param("pilot", "has no energy"));
    }
    let mut y = DMatrix::zeros(b, b);
    for j in 0..b {
        for i in 0..b {
            if i == j {
                continue;
            }
            let g = ch.r_rrh[i] * inter[(i, j)] * ch.t_rrh[j];
            let mut rx: Vec<Complex64> = pilot.iter().map(|p| g * p).collect();
            if let Some(p) = noise.power_dbm {
                let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
                rng.set_stream((j * b + i) as u64);
                rx.iter_mut()
                    .zip(complex_awgn(&mut rng, pilot.len(), p))
                    .for_each(|(r, n)| *r += n);
            }
            let corr: Complex64 = rx.iter().zip(pilot).map(|(r, p)| r * p.conj()).sum();
            y[(i, j)] = corr / energy;
        }
    }
    SoundingMatrix::new(y)
}

/// Solver settings for [`estimate_c`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrationOptions {
    /// Stop when the relative cost change falls below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// An RRH whose links are all below this fraction of the strongest link
    /// is reported as isolated.
    pub isolation_threshold: f64,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 10_000,
            isolation_threshold: 1e-9,
        }
    }
}

/// Output of [`estimate_c`].
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationEstimate {
    pub matrix: CalibrationMatrix,
    /// Final cost at `||c|| = sqrt(B)`.
    pub cost: f64,
    pub iterations: usize,
}

/// Hermitian form `Q` with `c^H Q c = sum_{i<j} |c_i Y_ij - c_j Y_ji|^2`.
pub fn calibration_form(y: &SoundingMatrix) -> DMatrix<Complex64> {
    let b = y.rrhs();
    let mut q = DMatrix::zeros(b, b);
    for i in 0..b {
        for j in i + 1..b {
            let (a, bb) = (y.y[(i, j)], -y.y[(j, i)]);
            // v = a e_i + bb e_j; Q += conj(v) v^T
            q[(i, i)] += a.conj() * a;
            q[(i, j)] += a.conj() * bb;
            q[(j, i)] += bb.conj() * a;
            q[(j, j)] += bb.conj() * bb;
        }
    }
    q
}

fn cost(q: &DMatrix<Complex64>, c: &DVector<Complex64>) -> f64 {
    (c.adjoint() * q * c)[(0, 0)].re
}

/// Estimates `C` from a sounding matrix.
pub fn estimate_c(y: &SoundingMatrix, opts: &CalibrationOptions) -> Result<CalibrationEstimate> {
    let b = y.rrhs();
    if b < 2 {
        return Err(Error::param("rrhs", "calibration needs at least two RRHs"));
    }
    let strongest = (0..b)
        .flat_map(|i| (0..b).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| y.y[(i, j)].norm())
        .fold(0.0, f64::max);
    for i in 0..b {
        let best = (0..b)
            .filter(|&j| j != i)
            .map(|j| y.y[(i, j)].norm().max(y.y[(j, i)].norm()))
            .fold(0.0, f64::max);
        if best <= opts.isolation_threshold * strongest {
            return Err(Error::IsolatedRrh { rrh: i });
        }
    }

    let q = calibration_form(y);
    let radius = (b as f64).sqrt();
    let eig = q.clone().symmetric_eigen();
    let k = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .unwrap_or(0);
    let mut c: DVector<Complex64> = eig.eigenvectors.column(k).into_owned();
    c *= Complex64::new(radius / c.norm(), 0.0);

    // projected gradient refinement; step below 1 / lambda_max keeps it stable
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let step = if lmax > 0.0 { 0.5 / lmax } else { 0.0 };
    // a cost this far below the form's scale is rounding noise
    let floor = 1e-14 * lmax * b as f64;
    let mut j = cost(&q, &c).max(0.0);
    let mut iterations = 0;
    while iterations < opts.max_iterations && j > floor && step > 0.0 {
        iterations += 1;
        let grad = &q * &c;
        let mut next = &c - grad * Complex64::new(step, 0.0);
        next *= Complex64::new(radius / next.norm(), 0.0);
        let jn = cost(&q, &next).max(0.0);
        let change = (j - jn).abs();
        if jn <= j {
            c = next;
            j = jn;
        }
        if change < opts.tolerance * j || change <= floor {
            break;
        }
    }
    let matrix = CalibrationMatrix::new(c)?.normalized()?;
    Ok(CalibrationEstimate {
        matrix,
        cost: j,
        iterations,
    })
}

/// Accuracy of an estimate against the simulation's ground truth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationQuality {
    pub max_phase_error_deg: f64,
    pub max_magnitude_error_db: f64,
    /// `max_i |c_est,i - c_true,i| / |c_true,i|`.
    pub max_relative_error: f64,
}

/// Compares `est` with the true `t / r` after aligning both on entry 0.
pub fn calibration_quality(
    ch: &ChannelState,
    est: &CalibrationMatrix,
) -> Result<CalibrationQuality> {
    let truth = CalibrationMatrix::new(ch.calibration_diagonal())?.normalized()?;
    let est = est.normalized()?;
    if truth.len() != est.len() {
        return Err(Error::DimensionMismatch(format!(
            "estimate has {} entries, scenario has {} RRHs",
            est.len(),
            truth.len()
        )));
    }
    let mut q = CalibrationQuality {
        max_phase_error_deg: 0.0,
        max_magnitude_error_db: 0.0,
        max_relative_error: 0.0,
    };
    for (e, t) in est.c.iter().zip(truth.c.iter()) {
        let ratio = e / t;
        q.max_phase_error_deg = q.max_phase_error_deg.max(ratio.arg().to_degrees().abs());
        q.max_magnitude_error_db = q
            .max_magnitude_error_db
            .max((20.0 * ratio.norm().log10()).abs());
        q.max_relative_error = q.max_relative_error.max((e - t).norm() / t.norm());
    }
    Ok(q)
}
