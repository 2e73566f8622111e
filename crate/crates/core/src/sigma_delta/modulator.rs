//! Sample-by-sample 1-bit loop simulation.
//!
//! The loop is realized in error-feedback form: the quantizer input is
//! `y = x + (NTF - 1) e` and the output `v = sign(y)` then satisfies
//! `v = x + NTF e` exactly, with `e = v - y`. `NTF - 1` is strictly causal
//! because both polynomials are monic, and it is evaluated through the
//! section cascade so high-order, high-OSR designs stay well conditioned.

use crate::error::{Error, Result};
use crate::sigcore::signal::BinaryStream;
use crate::sigma_delta::ntf::{synthesize_ntf, Ntf, SdmDesign, Section};

/// Loop state plus overload bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct SdmState {
    /// Per section: `[in[n-1], in[n-2], out[n-1], out[n-2]]`.
    pub sections: Vec<[f64; 4]>,
    /// Number of stability-guard resets.
    pub overloads: u64,
    /// Sample indices at which resets happened (first 64 kept).
    pub reset_log: Vec<u64>,
}

/// A runnable modulator: design, realized NTF and state.
#[derive(Debug, Clone)]
pub struct SdmLoop {
    design: SdmDesign,
    ntf: Ntf,
    state: SdmState,
    n: u64,
}

const RESET_LOG_CAP: usize = 64;

impl SdmLoop {
    pub fn new(design: SdmDesign) -> Result<Self> {
        let ntf = synthesize_ntf(&design)?;
        Ok(Self::from_ntf(design, ntf))
    }

    pub fn from_ntf(design: SdmDesign, ntf: Ntf) -> Self {
        let state = SdmState {
            sections: vec![[0.0; 4]; ntf.sections.len()],
            overloads: 0,
            reset_log: Vec::new(),
        };
        Self {
            design,
            ntf,
            state,
            n: 0,
        }
    }

    pub fn design(&self) -> &SdmDesign {
        &self.design
    }

    pub fn ntf(&self) -> &Ntf {
        &self.ntf
    }

    pub fn state(&self) -> &SdmState {
        &self.state
    }

    pub fn reset(&mut self) {
        self.state.sections.iter_mut().for_each(|s| *s = [0.0; 4]);
    }

    /// Feedback contribution `((NTF - 1) e)[n]` from past errors.
    #[inline]
    fn history(sections: &[Section], st: &[[f64; 4]]) -> f64 {
        sections
            .iter()
            .zip(st)
            .map(|(s, h)| s.b[0] * h[0] + s.b[1] * h[1] - s.a[0] * h[2] - s.a[1] * h[3])
            .sum()
    }

    /// Runs one sample and returns the quantized output.
    #[inline]
    pub fn step(&mut self, x: f64) -> i8 {
        let limit = self.design.stability_limit;
        let st = &mut self.state.sections;
        let secs = &self.ntf.sections;
        let y = x + Self::history(secs, st);
        let v: i8 = if y >= 0.0 { 1 } else { -1 };
        let e = v as f64 - y;
        // push e through the cascade: each section adds its history term
        let mut s_in = e;
        let mut bad = y.abs() > limit;
        for (s, h) in secs.iter().zip(st.iter_mut()) {
            let s_out = s_in + s.b[0] * h[0] + s.b[1] * h[1] - s.a[0] * h[2] - s.a[1] * h[3];
            *h = [s_in, h[0], s_out, h[2]];
            bad |= s_out.abs() > limit;
            s_in = s_out;
        }
        if bad {
            self.reset();
            self.state.overloads += 1;
            if self.state.reset_log.len() < RESET_LOG_CAP {
                self.state.reset_log.push(self.n);
            }
        }
        self.n += 1;
        v
    }

    /// Encodes a buffer normalized to quantizer full scale 1.
    pub fn encode(&mut self, x: &[f64]) -> Vec<i8> {
        x.iter().map(|&v| self.step(v)).collect()
    }
}

/// Encodes a real waveform (already normalized to full scale 1) at `rate`.
pub fn sdm_encode(x: &[f64], rate: f64, design: &SdmDesign) -> Result<(BinaryStream, SdmState)> {
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::param("signal", format!("non-finite sample at {i}")));
    }
    let mut lp = SdmLoop::new(*design)?;
    let bits = lp.encode(x);
    Ok((BinaryStream::new(bits, rate)?, lp.state().clone()))
}
