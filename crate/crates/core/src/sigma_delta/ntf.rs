//! Noise-transfer-function synthesis.
//!
//! Zeros sit on the unit circle at the optimal in-band positions (roots of
//! the Legendre polynomial scaled to the signal band, which minimize the
//! integrated in-band noise). Poles come from a maximally flat highpass
//! prototype whose cutoff is tuned by bisection until the peak NTF gain
//! equals the configured out-of-band gain. Bandpass designs are obtained
//! from a prototype of half the order through the lowpass-to-bandpass map
//! `z^-1 -> -z^-1 (z^-1 - a) / (1 - a z^-1)`, `a = cos w0`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Grid used to verify the peak NTF gain.
pub const NTF_GRID: usize = 8192;

/// Design parameters of a 1-bit modulator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdmDesign {
    /// Number of NTF zeros (twice the number of resonators for bandpass).
    pub order: usize,
    /// Centre frequency over sample rate; 0 for a lowpass design.
    pub center_frequency_ratio: f64,
    /// Oversampling ratio `fs / (2 W)`.
    pub osr: f64,
    /// Peak out-of-band NTF gain; `None` for an FIR (pole-free) NTF.
    pub max_ntf_gain: Option<f64>,
    /// State magnitude (in units of the quantizer full scale) that triggers
    /// a loop reset.
    pub stability_limit: f64,
}

impl SdmDesign {
    pub fn lowpass(order: usize, osr: f64) -> Self {
        Self {
            order,
            center_frequency_ratio: 0.0,
            osr,
            max_ntf_gain: Some(1.5),
            stability_limit: 10.0,
        }
    }

    pub fn bandpass(order: usize, center_frequency_ratio: f64, osr: f64) -> Self {
        Self {
            order,
            center_frequency_ratio,
            osr,
            max_ntf_gain: Some(1.5),
            stability_limit: 10.0,
        }
    }

    pub fn with_max_gain(mut self, g: Option<f64>) -> Self {
        self.max_ntf_gain = g;
        self
    }

    pub fn is_bandpass(&self) -> bool {
        self.center_frequency_ratio > 0.0
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=8).contains(&self.order) {
            return Err(Error::param(
                "order",
                format!("must be in 1..=8, got {}", self.order),
            ));
        }
        if !(0.0..0.5).contains(&self.center_frequency_ratio) {
            return Err(Error::param(
                "center_frequency_ratio",
                "must be in [0, 0.5)",
            ));
        }
        if self.is_bandpass() && self.order % 2 != 0 {
            return Err(Error::param("order", "bandpass designs need an even order"));
        }
        if !(self.osr > 1.0 && self.osr.is_finite()) {
            return Err(Error::param(
                "osr",
                format!("must be > 1, got {}", self.osr),
            ));
        }
        if let Some(g) = self.max_ntf_gain {
            if !(g > 1.0) {
                return Err(Error::param(
                    "max_ntf_gain",
                    format!("must be > 1, got {g}"),
                ));
            }
        }
        if !(self.stability_limit > 1.0) {
            return Err(Error::param("stability_limit", "must be > 1"));
        }
        Ok(())
    }

    /// Signal band `[f_lo, f_hi]` in units of the sample rate.
    pub fn band(&self) -> (f64, f64) {
        let w = 1.0 / (2.0 * self.osr);
        if self.is_bandpass() {
            (
                self.center_frequency_ratio - w / 2.0,
                self.center_frequency_ratio + w / 2.0,
            )
        } else {
            (0.0, w)
        }
    }
}

/// Oversampling ratio `fs / (2 W)`.
pub fn osr(fs: f64, w: f64) -> Result<f64> {
    if !(w > 0.0 && fs > 2.0 * w) {
        return Err(Error::param(
            "fs",
            format!("sampling rate {fs} Hz must exceed twice the bandwidth {w} Hz"),
        ));
    }
    Ok(fs / (2.0 * w))
}

/// A second-order (or first-order, when `b[1] = a[1] = 0`) section with monic
/// numerator and denominator: `(1 + b0 z^-1 + b1 z^-2) / (1 + a0 z^-1 + a1 z^-2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub b: [f64; 2],
    pub a: [f64; 2],
}

/// A synthesized NTF.
#[derive(Debug, Clone, PartialEq)]
pub struct Ntf {
    pub zeros: Vec<Complex64>,
    pub poles: Vec<Complex64>,
    /// Cascade realization of the same transfer function.
    pub sections: Vec<Section>,
}

impl Ntf {
    /// `NTF(e^{j 2 pi f})`, `f` in cycles per sample.
    pub fn response(&self, f: f64) -> Complex64 {
        let z = Complex64::from_polar(1.0, 2.0 * PI * f);
        let num: Complex64 = self.zeros.iter().map(|q| z - q).product();
        let den: Complex64 = self.poles.iter().map(|p| z - p).product();
        // equal numbers of zeros and poles, so NTF(inf) = 1
        num / den
    }

    /// Peak |NTF| on an `NTF_GRID`-point grid over `[0, 0.5]`.
    pub fn max_gain(&self) -> f64 {
        (0..=NTF_GRID)
            .map(|i| self.response(0.5 * i as f64 / NTF_GRID as f64).norm())
            .fold(0.0, f64::max)
    }

    /// |NTF| in dB at `f`.
    pub fn gain_db(&self, f: f64) -> f64 {
        20.0 * self.response(f).norm().log10()
    }
}

/// Roots of the Legendre polynomial of degree `n`, ascending.
pub fn legendre_roots(n: usize) -> Vec<f64> {
    let mut roots = Vec::with_capacity(n);
    for i in 1..=n {
        let mut x = (PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // evaluate P_n and P_n' by the three-term recurrence
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let (pn, pn1) = if n == 0 {
                (1.0, 0.0)
            } else if n == 1 {
                (x, 1.0)
            } else {
                (p1, p0)
            };
            let dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        roots.push(x);
    }
    roots.sort_by(|a, b| a.partial_cmp(b).expect("finite roots"));
    roots
}

/// Unit-circle NTF zeros for `design`.
fn place_zeros(design: &SdmDesign) -> Vec<Complex64> {
    if design.is_bandpass() {
        let w0 = 2.0 * PI * design.center_frequency_ratio;
        let half = PI / (2.0 * design.osr);
        let mut z = Vec::with_capacity(design.order);
        for x in legendre_roots(design.order / 2) {
            let w = w0 + x * half;
            z.push(Complex64::from_polar(1.0, w));
            z.push(Complex64::from_polar(1.0, -w));
        }
        z
    } else {
        legendre_roots(design.order)
            .into_iter()
            .map(|x| Complex64::from_polar(1.0, x * PI / design.osr))
            .collect()
    }
}

/// z-plane poles of an order-`n` maximally flat highpass with cutoff `wc`.
fn highpass_prototype_poles(n: usize, wc: f64) -> Vec<Complex64> {
    let omega = (wc / 2.0).tan();
    (0..n)
        .map(|k| {
            let s = Complex64::from_polar(1.0, PI * (2 * k + n + 1) as f64 / (2 * n) as f64);
            let p = omega / s;
            (1.0 + p) / (1.0 - p)
        })
        .collect()
}

/// Maps prototype poles through the lowpass-to-bandpass transform.
fn to_bandpass(poles: &[Complex64], alpha: f64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(2 * poles.len());
    for &p in poles {
        // the factor (1 - p w) with w = z^-1 becomes a quadratic in w whose
        // roots are the reciprocals of the new poles
        let v = 1.0 / p;
        let b = -alpha * (1.0 + v);
        let disc = (b * b - 4.0 * v).sqrt();
        for w in [(-b + disc) / 2.0, (-b - disc) / 2.0] {
            out.push(1.0 / w);
        }
    }
    out
}

fn poles_for(design: &SdmDesign, wc: f64) -> Vec<Complex64> {
    if design.is_bandpass() {
        let proto = highpass_prototype_poles(design.order / 2, wc);
        to_bandpass(&proto, (2.0 * PI * design.center_frequency_ratio).cos())
    } else {
        highpass_prototype_poles(design.order, wc)
    }
}

/// Groups roots into real-coefficient quadratic (or linear) factors
/// `1 + c0 z^-1 + c1 z^-2`.
fn real_factors(roots: &[Complex64]) -> Vec<([f64; 2], f64)> {
    let mut used = vec![false; roots.len()];
    let mut out = Vec::new();
    // complex pairs first, keyed by angle so they can be matched with poles
    for i in 0..roots.len() {
        if used[i] || roots[i].im.abs() < 1e-12 {
            continue;
        }
        let conj = (0..roots.len())
            .filter(|&j| j != i && !used[j])
            .min_by(|&a, &b| {
                let da = (roots[a] - roots[i].conj()).norm();
                let db = (roots[b] - roots[i].conj()).norm();
                da.partial_cmp(&db).expect("finite")
            });
        used[i] = true;
        if let Some(j) = conj {
            used[j] = true;
        }
        let r = roots[i];
        out.push(([-2.0 * r.re, r.norm_sqr()], r.arg().abs()));
    }
    let reals: Vec<f64> = (0..roots.len())
        .filter(|&i| !used[i])
        .map(|i| roots[i].re)
        .collect();
    for pair in reals.chunks(2) {
        match pair {
            [a, b] => out.push(([-(a + b), a * b], if (a + b) < 0.0 { PI } else { 0.0 })),
            [a] => out.push(([-a, 0.0], if *a < 0.0 { PI } else { 0.0 })),
            _ => unreachable!(),
        }
    }
    out
}

fn build_sections(zeros: &[Complex64], poles: &[Complex64]) -> Vec<Section> {
    let mut zf = real_factors(zeros);
    let mut pf = real_factors(poles);
    zf.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite"));
    pf.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite"));
    let n = zf.len().max(pf.len());
    (0..n)
        .map(|i| Section {
            b: zf.get(i).map(|f| f.0).unwrap_or([0.0, 0.0]),
            a: pf.get(i).map(|f| f.0).unwrap_or([0.0, 0.0]),
        })
        .collect()
}

/// Synthesizes the NTF and its cascade realization.
pub fn synthesize_ntf(design: &SdmDesign) -> Result<Ntf> {
    design.validate()?;
    let zeros = place_zeros(design);
    let Some(target) = design.max_ntf_gain else {
        let poles = vec![Complex64::new(0.0, 0.0); zeros.len()];
        let sections = build_sections(&zeros, &poles);
        return Ok(Ntf {
            zeros,
            poles,
            sections,
        });
    };
    let gain_at = |wc: f64| {
        let poles = poles_for(design, wc);
        Ntf {
            zeros: zeros.clone(),
            poles,
            sections: Vec::new(),
        }
        .max_gain()
    };
    // The peak gain is large when the cutoff sits below the signal band
    // (poles inside the band, away from the zeros), falls to a minimum near
    // the band edge and then rises towards 2^order as the poles approach the
    // origin. Locate the minimum on a log grid, then bisect on the rising
    // branch.
    const SCAN: usize = 240;
    let grid: Vec<f64> = (0..SCAN)
        .map(|i| 1e-5 * (PI / 1e-5).powf(i as f64 / (SCAN - 1) as f64) * (1.0 - 1e-9))
        .collect();
    let (i_min, g_min) =
        grid.iter()
            .map(|&wc| gain_at(wc))
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |a, (i, g)| if g < a.1 { (i, g) } else { a },
            );
    let g_max = gain_at(grid[SCAN - 1]);
    if !(g_min <= target && g_max >= target) {
        return Err(Error::Infeasible(format!(
            "peak NTF gain {target} outside reachable range [{g_min:.4}, {g_max:.4}] for order {} at OSR {}",
            design.order, design.osr
        )));
    }
    let (mut lo, mut hi) = (grid[i_min], grid[SCAN - 1]);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gain_at(mid) > target {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    let poles = poles_for(design, lo);
    if poles.iter().any(|p| p.norm() >= 1.0) {
        return Err(Error::Infeasible(format!(
            "pole placement left a pole on or outside the unit circle (|p| = {:.6})",
            poles.iter().map(|p| p.norm()).fold(0.0, f64::max)
        )));
    }
    let ntf = Ntf {
        sections: build_sections(&zeros, &poles),
        zeros,
        poles,
    };
    let g = ntf.max_gain();
    if g > target + 0.01 {
        return Err(Error::Infeasible(format!(
            "pole placement did not converge: peak gain {g:.4} exceeds {target}"
        )));
    }
    Ok(ntf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_roots_known_values() {
        let r = legendre_roots(2);
        assert!((r[1] - 1.0 / 3f64.sqrt()).abs() < 1e-14);
        let r = legendre_roots(3);
        assert!(r[1].abs() < 1e-14);
        assert!((r[2] - (3.0f64 / 5.0).sqrt()).abs() < 1e-14);
        assert_eq!(legendre_roots(1), vec![0.0]);
    }

    #[test]
    fn osr_arithmetic() {
        assert!((osr(10e9, 12e6).unwrap() - 416.666_666).abs() < 1e-3);
        assert!(osr(10e9, 5e9).is_err());
    }

    #[test]
    fn invalid_designs_rejected() {
        assert!(synthesize_ntf(&SdmDesign::lowpass(0, 64.0)).is_err());
        assert!(synthesize_ntf(&SdmDesign::lowpass(9, 64.0)).is_err());
        assert!(synthesize_ntf(&SdmDesign::bandpass(3, 0.25, 64.0)).is_err());
        assert!(synthesize_ntf(&SdmDesign::lowpass(2, 64.0).with_max_gain(Some(0.9))).is_err());
    }

    #[test]
    fn sections_reproduce_response() {
        for d in [
            SdmDesign::lowpass(3, 32.0),
            SdmDesign::bandpass(4, 0.235, 100.0),
        ] {
            let ntf = synthesize_ntf(&d).unwrap();
            for f in [0.01, 0.1, 0.2, 0.235, 0.4] {
                let z1 = Complex64::from_polar(1.0, -2.0 * PI * f);
                let h: Complex64 = ntf
                    .sections
                    .iter()
                    .map(|s| {
                        (1.0 + s.b[0] * z1 + s.b[1] * z1 * z1)
                            / (1.0 + s.a[0] * z1 + s.a[1] * z1 * z1)
                    })
                    .product();
                assert!((h - ntf.response(f)).norm() < 1e-9, "f={f}");
            }
        }
    }
}
