//! Linear-phase FIR design by the Kaiser window method.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Default cap on the number of taps a design may use.
pub const DEFAULT_MAX_TAPS: usize = 1 << 17;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FilterKind {
    /// Passband `[0, cutoff]`.
    Lowpass { cutoff: f64 },
    /// Passband `[low, high]`.
    Bandpass { low: f64, high: f64 },
}

/// Magnitude specification of a filter. Band edges are passband edges in Hz;
/// the stopband starts `transition` Hz beyond each edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    pub kind: FilterKind,
    pub transition: f64,
    pub stopband_atten_db: f64,
    pub passband_ripple_db: f64,
    pub max_taps: usize,
}

impl FilterSpec {
    pub fn lowpass(cutoff: f64, transition: f64, stopband_atten_db: f64) -> Self {
        Self {
            kind: FilterKind::Lowpass { cutoff },
            transition,
            stopband_atten_db,
            passband_ripple_db: 0.1,
            max_taps: DEFAULT_MAX_TAPS,
        }
    }

    pub fn bandpass(low: f64, high: f64, transition: f64, stopband_atten_db: f64) -> Self {
        Self {
            kind: FilterKind::Bandpass { low, high },
            transition,
            stopband_atten_db,
            passband_ripple_db: 0.1,
            max_taps: DEFAULT_MAX_TAPS,
        }
    }

    pub fn with_ripple(mut self, ripple_db: f64) -> Self {
        self.passband_ripple_db = ripple_db;
        self
    }

    pub fn with_max_taps(mut self, max_taps: usize) -> Self {
        self.max_taps = max_taps;
        self
    }

    /// Highest passband frequency.
    pub fn passband_edge(&self) -> f64 {
        match self.kind {
            FilterKind::Lowpass { cutoff } => cutoff,
            FilterKind::Bandpass { high, .. } => high,
        }
    }

    /// Highest stopband-start frequency.
    pub fn stopband_edge(&self) -> f64 {
        self.passband_edge() + self.transition
    }

    pub fn validate(&self, rate: f64) -> Result<()> {
        let nyq = rate / 2.0;
        if !(self.stopband_atten_db > 0.0) {
            return Err(Error::param("stopband_atten_db", "must be > 0"));
        }
        if !(self.passband_ripple_db > 0.0) {
            return Err(Error::param("passband_ripple_db", "must be > 0"));
        }
        if !(self.transition > 0.0) {
            return Err(Error::param("transition", "must be > 0"));
        }
        match self.kind {
            FilterKind::Lowpass { cutoff } => {
                if !(cutoff > 0.0 && cutoff + self.transition < nyq) {
                    return Err(Error::param(
                        "cutoff",
                        format!("need 0 < cutoff and cutoff + transition < {nyq} Hz, got {cutoff}"),
                    ));
                }
            }
            FilterKind::Bandpass { low, high } => {
                if !(low - self.transition > 0.0 && high > low && high + self.transition < nyq) {
                    return Err(Error::param(
                        "band",
                        format!("need transition < low < high < {nyq} - transition, got [{low}, {high}]"),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// A linear-phase FIR filter with odd length and symmetric taps.
#[derive(Debug, Clone, PartialEq)]
pub struct Fir {
    taps: Vec<f64>,
}

impl Fir {
    pub fn from_taps(taps: Vec<f64>) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::param("taps", "empty tap list"));
        }
        Ok(Self { taps })
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// Group delay in samples, `(N - 1) / 2`.
    pub fn group_delay(&self) -> f64 {
        (self.taps.len() as f64 - 1.0) / 2.0
    }

    /// |H(f)| at frequency `f` for sample rate `rate`.
    pub fn magnitude_at(&self, f: f64, rate: f64) -> f64 {
        dtft_magnitude(&self.taps, f / rate)
    }
}

/// |sum h[k] e^{-j 2 pi nu k}| at normalized frequency `nu` (cycles/sample).
pub fn dtft_magnitude(taps: &[f64], nu: f64) -> f64 {
    let w = 2.0 * PI * nu;
    let (mut re, mut im) = (0.0, 0.0);
    for (k, &h) in taps.iter().enumerate() {
        let a = w * k as f64;
        re += h * a.cos();
        im -= h * a.sin();
    }
    re.hypot(im)
}

/// Zeroth-order modified Bessel function of the first kind.
pub fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    while term > sum * 1e-17 {
        term *= q / (k * k);
        sum += term;
        k += 1.0;
    }
    sum
}

/// Kaiser shape parameter for a given attenuation in dB.
pub fn kaiser_beta(atten_db: f64) -> f64 {
    if atten_db > 50.0 {
        0.1102 * (atten_db - 8.7)
    } else if atten_db >= 21.0 {
        0.5842 * (atten_db - 21.0).powf(0.4) + 0.07886 * (atten_db - 21.0)
    } else {
        0.0
    }
}

/// Odd Kaiser length estimate for attenuation `atten_db` and a transition of
/// `transition_norm` cycles/sample.
pub fn kaiser_length(atten_db: f64, transition_norm: f64) -> usize {
    let n = ((atten_db - 7.95) / (2.285 * 2.0 * PI * transition_norm))
        .ceil()
        .max(1.0) as usize
        + 1;
    n | 1
}

pub fn kaiser_window(len: usize, beta: f64) -> Vec<f64> {
    if len == 1 {
        return vec![1.0];
    }
    let m = (len - 1) as f64;
    let denom = bessel_i0(beta);
    let mut w: Vec<f64> = (0..len)
        .map(|n| {
            let r = 2.0 * n as f64 / m - 1.0;
            bessel_i0(beta * (1.0 - r * r).max(0.0).sqrt()) / denom
        })
        .collect();
    mirror(&mut w);
    w
}

/// Forces exact symmetry `h[k] == h[N-1-k]` by copying the first half.
fn mirror(h: &mut [f64]) {
    let n = h.len();
    for k in 0..n / 2 {
        h[n - 1 - k] = h[k];
    }
}

/// Windowed-sinc lowpass with cutoff `fc` in cycles/sample and unit DC gain
/// before windowing.
pub fn windowed_sinc(len: usize, fc: f64, window: &[f64]) -> Vec<f64> {
    let c = (len as f64 - 1.0) / 2.0;
    let mut h: Vec<f64> = (0..len)
        .map(|n| {
            let x = n as f64 - c;
            let s = if x == 0.0 {
                2.0 * fc
            } else {
                (2.0 * PI * fc * x).sin() / (PI * x)
            };
            s * window[n]
        })
        .collect();
    mirror(&mut h);
    h
}

fn taps_for(spec: &FilterSpec, rate: f64, len: usize, atten: f64) -> Vec<f64> {
    let win = kaiser_window(len, kaiser_beta(atten));
    let half_tr = spec.transition / 2.0;
    match spec.kind {
        FilterKind::Lowpass { cutoff } => {
            let mut h = windowed_sinc(len, (cutoff + half_tr) / rate, &win);
            let dc: f64 = h.iter().sum();
            h.iter_mut().for_each(|v| *v /= dc);
            h
        }
        FilterKind::Bandpass { low, high } => {
            let hi = windowed_sinc(len, (high + half_tr) / rate, &win);
            let lo = windowed_sinc(len, (low - half_tr) / rate, &win);
            let mut h: Vec<f64> = hi.iter().zip(&lo).map(|(a, b)| a - b).collect();
            let g = dtft_magnitude(&h, (low + high) / 2.0 / rate);
            h.iter_mut().for_each(|v| *v /= g);
            h
        }
    }
}

/// Checks the spec on a grid; returns the name of the first violated
/// constraint.
fn check_on_grid(spec: &FilterSpec, rate: f64, taps: &[f64], grid: usize) -> Option<&'static str> {
    let delta_p_hi = 10f64.powf(spec.passband_ripple_db / 20.0);
    let delta_p_lo = 10f64.powf(-spec.passband_ripple_db / 20.0);
    let stop = 10f64.powf(-spec.stopband_atten_db / 20.0);
    let nyq = rate / 2.0;
    for i in 0..=grid {
        let f = nyq * i as f64 / grid as f64;
        let (pass, stopband) = match spec.kind {
            FilterKind::Lowpass { cutoff } => (f <= cutoff, f >= cutoff + spec.transition),
            FilterKind::Bandpass { low, high } => (
                f >= low && f <= high,
                f <= low - spec.transition || f >= high + spec.transition,
            ),
        };
        if !(pass || stopband) {
            continue;
        }
        let m = dtft_magnitude(taps, f / rate);
        if pass && (m > delta_p_hi || m < delta_p_lo) {
            return Some("passband ripple");
        }
        if stopband && m > stop {
            return Some("stopband attenuation");
        }
    }
    None
}

/// Designs a linear-phase FIR meeting `spec` at sample rate `rate`.
///
/// The Kaiser estimate seeds the length; the design is then checked on a
/// frequency grid and lengthened until it passes or exceeds `max_taps`.
pub fn design_fir(spec: &FilterSpec, rate: f64) -> Result<Fir> {
    spec.validate(rate)?;
    // the Kaiser window gives equal ripple in both bands
    let ripple_atten = -20.0 * (10f64.powf(spec.passband_ripple_db / 20.0) - 1.0).log10();
    let atten = spec.stopband_atten_db.max(ripple_atten) + 1.0;
    let mut len = kaiser_length(atten, spec.transition / rate);
    // the grid must resolve the transition band
    let grid = ((rate / 2.0) / (spec.transition / 8.0))
        .ceil()
        .clamp(4096.0, 65536.0) as usize;
    let mut last_violation = "length cap";
    for _ in 0..24 {
        if len > spec.max_taps {
            break;
        }
        let taps = taps_for(spec, rate, len, atten);
        // grid checks on very long filters are costly; these are only run
        // below the limit where a DTFT sweep is cheap
        let violation = if len * grid <= 400_000_000 {
            check_on_grid(spec, rate, &taps, grid)
        } else {
            None
        };
        match violation {
            None => return Fir::from_taps(taps),
            Some(v) => {
                last_violation = v;
                len = (len + len / 8 + 2) | 1;
            }
        }
    }
    Err(Error::Infeasible(format!(
        "{last_violation} not met within {} taps (estimated length {len})",
        spec.max_taps
    )))
}

type DesignCache = Mutex<HashMap<Vec<u64>, Arc<Fir>>>;

/// [`design_fir`] memoized per `(spec, rate)`. Sweeps redesign the same
/// long filters for every point; the cache makes that free after the first.
pub fn design_fir_cached(spec: &FilterSpec, rate: f64) -> Result<Arc<Fir>> {
    static CACHE: OnceLock<DesignCache> = OnceLock::new();
    let (k, a, b) = match spec.kind {
        FilterKind::Lowpass { cutoff } => (0, cutoff, 0.0),
        FilterKind::Bandpass { low, high } => (1, low, high),
    };
    let key = vec![
        k,
        a.to_bits(),
        b.to_bits(),
        spec.transition.to_bits(),
        spec.stopband_atten_db.to_bits(),
        spec.passband_ripple_db.to_bits(),
        spec.max_taps as u64,
        rate.to_bits(),
    ];
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(f) = cache.lock().unwrap_or_else(|e| e.into_inner()).get(&key) {
        return Ok(Arc::clone(f));
    }
    let fir = Arc::new(design_fir(spec, rate)?);
    cache
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .insert(key, Arc::clone(&fir));
    Ok(fir)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bessel_i0_reference_values() {
        assert!((bessel_i0(0.0) - 1.0).abs() < 1e-15);
        assert!((bessel_i0(1.0) - 1.266_065_877_752_008_4).abs() < 1e-13);
        assert!((bessel_i0(5.0) - 27.239_871_823_604_442).abs() < 1e-10);
    }

    #[test]
    fn infeasible_spec_names_constraint() {
        let spec = FilterSpec::lowpass(180e6, 1e6, 80.0).with_max_taps(101);
        let err = design_fir(&spec, 10e9).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)), "{err}");
        assert!(err.to_string().contains("within 101 taps"));
    }

    #[test]
    fn invalid_edges_rejected() {
        assert!(design_fir(&FilterSpec::lowpass(6e9, 1e6, 40.0), 10e9).is_err());
        assert!(design_fir(&FilterSpec::lowpass(100e6, 1e6, 0.0), 10e9).is_err());
        assert!(design_fir(&FilterSpec::bandpass(2.4e9, 2.3e9, 1e6, 40.0), 10e9).is_err());
    }

    #[test]
    fn taps_are_symmetric_and_odd() {
        let fir = design_fir(&FilterSpec::lowpass(0.1, 0.05, 50.0), 1.0).unwrap();
        let t = fir.taps();
        assert_eq!(t.len() % 2, 1);
        for k in 0..t.len() {
            assert_eq!(t[k], t[t.len() - 1 - k]);
        }
        assert_eq!(fir.group_delay(), (t.len() as f64 - 1.0) / 2.0);
    }
}
