//! Reciprocal MIMO propagation between RRHs and UEs, with non-reciprocal
//! transceiver gains at every node, AWGN and interference composition.
//!
//! The propagation matrix `H` (B x U) is the same in both directions. Each
//! node has a receive gain `r` and a transmit gain `t`, so the effective
//! uplink matrix is `R_RRH H T_UE` and the effective downlink matrix is
//! `R_UE H^T T_RRH`. The channel is frequency flat and applied to complex
//! baseband streams.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sigcore::power::{dbm_to_watts, mean_square_complex, REFERENCE_OHMS};
use crate::sigcore::signal::{BasebandSignal, PassbandSignal};

/// Speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Node positions in metres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    pub rrh: Vec<[f64; 2]>,
    pub ue: Vec<[f64; 2]>,
    pub wavelength: f64,
}

impl Geometry {
    /// The three-RRH, two-UE line-of-sight layout of the lab setup: RRHs 1 m
    /// apart, UEs 1 m apart and about 2 m away, at 2.35 GHz.
    pub fn lab() -> Self {
        Self {
            rrh: vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]],
            ue: vec![[0.5, 2.0], [1.5, 2.0]],
            wavelength: SPEED_OF_LIGHT / 2.35e9,
        }
    }
}

/// How `H` is drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelModel {
    /// Free-space line of sight from node coordinates.
    Los(Geometry),
    /// i.i.d. unit-variance circular Gaussian entries.
    Rayleigh,
}

/// How the per-node transceiver gains are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GainModel {
    /// All gains 1: a perfectly reciprocal system.
    Identity,
    /// Magnitude log-uniform within `+-spread_db`, phase uniform.
    Random { spread_db: f64 },
}

/// Ground truth of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    /// Reciprocal propagation, B x U.
    pub h: DMatrix<Complex64>,
    pub r_rrh: DVector<Complex64>,
    pub t_rrh: DVector<Complex64>,
    pub r_ue: DVector<Complex64>,
    pub t_ue: DVector<Complex64>,
}

impl ChannelState {
    /// Builds a state, checking dimensions and that no gain is zero.
    pub fn new(
        h: DMatrix<Complex64>,
        r_rrh: DVector<Complex64>,
        t_rrh: DVector<Complex64>,
        r_ue: DVector<Complex64>,
        t_ue: DVector<Complex64>,
    ) -> Result<Self> {
        let (b, u) = h.shape();
        if r_rrh.len() != b || t_rrh.len() != b || r_ue.len() != u || t_ue.len() != u {
            return Err(Error::DimensionMismatch(format!(
                "H is {b}x{u}; gains have lengths {}, {}, {}, {}",
                r_rrh.len(),
                t_rrh.len(),
                r_ue.len(),
                t_ue.len()
            )));
        }
        for g in [&r_rrh, &t_rrh, &r_ue, &t_ue] {
            if g.iter().any(|v| v.norm() == 0.0) {
                return Err(Error::param("gains", "transceiver gains must be nonzero"));
            }
        }
        Ok(Self {
            h,
            r_rrh,
            t_rrh,
            r_ue,
            t_ue,
        })
    }

    /// Reciprocal state with all transceiver gains equal to 1.
    pub fn reciprocal(h: DMatrix<Complex64>) -> Self {
        let (b, u) = h.shape();
        let one = |n| DVector::from_element(n, Complex64::new(1.0, 0.0));
        Self {
            h,
            r_rrh: one(b),
            t_rrh: one(b),
            r_ue: one(u),
            t_ue: one(u),
        }
    }

    pub fn rrhs(&self) -> usize {
        self.h.nrows()
    }

    pub fn ues(&self) -> usize {
        self.h.ncols()
    }

    /// `R_RRH H T_UE`, B x U.
    pub fn uplink_matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.rrhs(), self.ues(), |b, u| {
            self.r_rrh[b] * self.h[(b, u)] * self.t_ue[u]
        })
    }

    /// `R_UE H^T T_RRH`, U x B.
    pub fn downlink_matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.ues(), self.rrhs(), |u, b| {
            self.r_ue[u] * self.h[(b, u)] * self.t_rrh[b]
        })
    }

    /// The true calibration diagonal `t_RRH / r_RRH`.
    pub fn calibration_diagonal(&self) -> DVector<Complex64> {
        self.t_rrh.zip_map(&self.r_rrh, |t, r| t / r)
    }
}

/// Free-space response `(lambda / 4 pi d) e^{-j 2 pi d / lambda}` between
/// every pair of points of `a` (rows) and `b` (columns).
pub fn los_matrix(a: &[[f64; 2]], b: &[[f64; 2]], wavelength: f64) -> Result<DMatrix<Complex64>> {
    if !(wavelength > 0.0) {
        return Err(Error::param("wavelength", "must be > 0"));
    }
    let mut h = DMatrix::zeros(a.len(), b.len());
    for (i, p) in a.iter().enumerate() {
        for (j, q) in b.iter().enumerate() {
            let d = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
            if d == 0.0 {
                return Err(Error::param(
                    "geometry",
                    format!("nodes {i} and {j} coincide at ({}, {})", p[0], p[1]),
                ));
            }
            h[(i, j)] = Complex64::from_polar(
                wavelength / (4.0 * std::f64::consts::PI * d),
                -2.0 * std::f64::consts::PI * d / wavelength,
            );
        }
    }
    Ok(h)
}

/// Symmetric RRH-to-RRH propagation for over-the-air calibration; the
/// diagonal (self-links) is zero.
pub fn inter_rrh_matrix(rrh: &[[f64; 2]], wavelength: f64) -> Result<DMatrix<Complex64>> {
    let n = rrh.len();
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = los_matrix(&rrh[i..=i], &rrh[j..=j], wavelength)?[(0, 0)];
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    Ok(h)
}

/// Circular Gaussian sample with `E|z|^2 = 1`.
pub fn circular_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn draw_gains<R: Rng + ?Sized>(rng: &mut R, n: usize, model: GainModel) -> DVector<Complex64> {
    match model {
        GainModel::Identity => DVector::from_element(n, Complex64::new(1.0, 0.0)),
        GainModel::Random { spread_db } => DVector::from_fn(n, |_, _| {
            let db = rng.random_range(-spread_db..=spread_db);
            let ph = rng.random_range(0.0..std::f64::consts::TAU);
            Complex64::from_polar(10f64.powf(db / 20.0), ph)
        }),
    }
}

/// Draws a scenario.
///
/// For [`ChannelModel::Los`] the node counts must match the geometry; `H`
/// is then deterministic and only the gains use `seed`.
pub fn draw_channel(
    model: &ChannelModel,
    rrhs: usize,
    ues: usize,
    gains: GainModel,
    seed: u64,
) -> Result<ChannelState> {
    if rrhs == 0 || ues == 0 {
        return Err(Error::param(
            "dimensions",
            "need at least one RRH and one UE",
        ));
    }
    if let GainModel::Random { spread_db } = gains {
        if !(spread_db >= 0.0 && spread_db.is_finite()) {
            return Err(Error::param("spread_db", "must be finite and >= 0"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = match model {
        ChannelModel::Los(g) => {
            if g.rrh.len() != rrhs || g.ue.len() != ues {
                return Err(Error::DimensionMismatch(format!(
                    "geometry has {} RRHs and {} UEs, scenario asks for {rrhs} and {ues}",
                    g.rrh.len(),
                    g.ue.len()
                )));
            }
            los_matrix(&g.rrh, &g.ue, g.wavelength)?
        }
        ChannelModel::Rayleigh => DMatrix::from_fn(rrhs, ues, |_, _| circular_normal(&mut rng)),
    };
    let r_rrh = draw_gains(&mut rng, rrhs, gains);
    let t_rrh = draw_gains(&mut rng, rrhs, gains);
    let r_ue = draw_gains(&mut rng, ues, gains);
    let t_ue = draw_gains(&mut rng, ues, gains);
    ChannelState::new(h, r_rrh, t_rrh, r_ue, t_ue)
}

/// Receiver noise added by [`uplink_apply`] / [`downlink_apply`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    /// Complex noise power per receiver over the stream's sample rate, dBm
    /// (`mean|n|^2 / 50`). `None` disables noise.
    pub power_dbm: Option<f64>,
    pub seed: u64,
}

impl NoiseConfig {
    pub fn none() -> Self {
        Self {
            power_dbm: None,
            seed: 0,
        }
    }

    pub fn new(power_dbm: f64, seed: u64) -> Self {
        Self {
            power_dbm: Some(power_dbm),
            seed,
        }
    }
}

/// `len` samples of circular complex AWGN with power `power_dbm`
/// (`mean|n|^2 / 50`).
pub fn complex_awgn<R: Rng + ?Sized>(rng: &mut R, len: usize, power_dbm: f64) -> Vec<Complex64> {
    let sigma = (dbm_to_watts(power_dbm) * REFERENCE_OHMS).sqrt();
    (0..len).map(|_| circular_normal(rng) * sigma).collect()
}

fn mix_streams(
    tx: &[BasebandSignal],
    m: &DMatrix<Complex64>,
    noise: &NoiseConfig,
) -> Result<Vec<BasebandSignal>> {
    if tx.len() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{} input streams for a channel with {} inputs",
            tx.len(),
            m.ncols()
        )));
    }
    let first = tx
        .first()
        .ok_or_else(|| Error::DimensionMismatch("no input streams".into()))?;
    let (len, rate, fc) = (first.len(), first.rate(), first.center_frequency());
    if let Some(s) = tx.iter().find(|s| s.len() != len || s.rate() != rate) {
        return Err(Error::DimensionMismatch(format!(
            "streams must share length and rate: {} samples at {} Hz vs {len} at {rate} Hz",
            s.len(),
            s.rate()
        )));
    }
    (0..m.nrows())
        .map(|row| {
            let mut y = vec![Complex64::new(0.0, 0.0); len];
            for (col, s) in tx.iter().enumerate() {
                let g = m[(row, col)];
                y.iter_mut()
                    .zip(s.samples())
                    .for_each(|(acc, x)| *acc += g * x);
            }
            if let Some(p) = noise.power_dbm {
                let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
                rng.set_stream(row as u64);
                let n = complex_awgn(&mut rng, len, p);
                y.iter_mut().zip(n).for_each(|(acc, v)| *acc += v);
            }
            BasebandSignal::new(y, rate, fc)
        })
        .collect()
}

/// UE streams -> RRH streams through `R_RRH H T_UE`, plus per-RRH noise.
pub fn uplink_apply(
    tx: &[BasebandSignal],
    ch: &ChannelState,
    noise: &NoiseConfig,
) -> Result<Vec<BasebandSignal>> {
    mix_streams(tx, &ch.uplink_matrix(), noise)
}

/// RRH streams -> UE streams through `R_UE H^T T_RRH`, plus per-UE noise.
pub fn downlink_apply(
    tx: &[BasebandSignal],
    ch: &ChannelState,
    noise: &NoiseConfig,
) -> Result<Vec<BasebandSignal>> {
    mix_streams(tx, &ch.downlink_matrix(), noise)
}

/// Interferer gain that puts it `sir_db` below the desired power.
fn interferer_gain(p_desired: f64, p_interferer: f64, sir_db: f64) -> Result<f64> {
    if p_interferer <= 0.0 {
        return Err(Error::param(
            "interferer",
            "has zero power; SIR cannot be set",
        ));
    }
    Ok((p_desired / p_interferer / 10f64.powf(sir_db / 10.0)).sqrt())
}

/// `desired + g * interferer` with `g` chosen so that the measured power
/// ratio is `sir_db`. An infinite SIR returns `desired` unchanged.
pub fn add_interference(
    desired: &BasebandSignal,
    interferer: &BasebandSignal,
    sir_db: f64,
) -> Result<BasebandSignal> {
    if sir_db == f64::INFINITY {
        return Ok(desired.clone());
    }
    if desired.rate() != interferer.rate() || desired.len() != interferer.len() {
        return Err(Error::DimensionMismatch(
            "desired and interfering signals must share rate and length".into(),
        ));
    }
    let g = interferer_gain(
        mean_square_complex(desired.samples()),
        mean_square_complex(interferer.samples()),
        sir_db,
    )?;
    let y = desired
        .samples()
        .iter()
        .zip(interferer.samples())
        .map(|(d, i)| d + i * g)
        .collect();
    BasebandSignal::new(y, desired.rate(), desired.center_frequency())
}

/// [`add_interference`] for real RF waveforms.
pub fn add_interference_passband(
    desired: &PassbandSignal,
    interferer: &PassbandSignal,
    sir_db: f64,
) -> Result<PassbandSignal> {
    if sir_db == f64::INFINITY {
        return Ok(desired.clone());
    }
    if desired.rate() != interferer.rate() || desired.len() != interferer.len() {
        return Err(Error::DimensionMismatch(
            "desired and interfering signals must share rate and length".into(),
        ));
    }
    let ms = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>() / x.len().max(1) as f64;
    let g = interferer_gain(ms(desired.samples()), ms(interferer.samples()), sir_db)?;
    let y = desired
        .samples()
        .iter()
        .zip(interferer.samples())
        .map(|(d, i)| d + i * g)
        .collect();
    PassbandSignal::new(y, desired.rate())
}
