//! Gray-mapped QPSK and 16QAM with unit average constellation power.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Qpsk,
    #[serde(rename = "16qam")]
    Qam16,
}

impl Scheme {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            Scheme::Qpsk => 2,
            Scheme::Qam16 => 4,
        }
    }

    /// Minimum EVM requirement for this modulation, percent.
    pub fn evm_requirement_percent(self) -> f64 {
        match self {
            Scheme::Qpsk => 17.5,
            Scheme::Qam16 => 12.5,
        }
    }

    /// All constellation points, indexed by the integer value of their bit
    /// pattern (first bit most significant).
    pub fn constellation(self) -> Vec<Complex64> {
        let n = 1usize << self.bits_per_symbol();
        (0..n)
            .map(|v| {
                let bits: Vec<u8> = (0..self.bits_per_symbol())
                    .rev()
                    .map(|b| ((v >> b) & 1) as u8)
                    .collect();
                map_one(&bits, self)
            })
            .collect()
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::Qpsk => "QPSK",
            Scheme::Qam16 => "16QAM",
        })
    }
}

/// A block of constellation symbols. Pilot positions index into `symbols`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolFrame {
    pub symbols: Vec<Complex64>,
    pub scheme: Scheme,
    pub pilot_positions: Vec<usize>,
}

impl SymbolFrame {
    pub fn new(symbols: Vec<Complex64>, scheme: Scheme) -> Self {
        Self {
            symbols,
            scheme,
            pilot_positions: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Symbols that are not pilots.
    pub fn data_symbols(&self) -> Vec<Complex64> {
        if self.pilot_positions.is_empty() {
            return self.symbols.clone();
        }
        let mut is_pilot = vec![false; self.symbols.len()];
        self.pilot_positions
            .iter()
            .for_each(|&p| is_pilot[p] = true);
        self.symbols
            .iter()
            .zip(is_pilot)
            .filter(|(_, p)| !p)
            .map(|(s, _)| *s)
            .collect()
    }
}

const QAM16_SCALE: f64 = 0.316_227_766_016_837_94; // 1/sqrt(10)

/// Gray level of a 2-bit pair on one 16QAM axis.
fn qam16_level(b0: u8, b1: u8) -> f64 {
    match (b0, b1) {
        (0, 0) => -3.0,
        (0, 1) => -1.0,
        (1, 1) => 1.0,
        _ => 3.0,
    }
}

fn map_one(bits: &[u8], scheme: Scheme) -> Complex64 {
    match scheme {
        Scheme::Qpsk => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let lvl = |b: u8| if b == 0 { -s } else { s };
            Complex64::new(lvl(bits[0]), lvl(bits[1]))
        }
        Scheme::Qam16 => Complex64::new(
            qam16_level(bits[0], bits[1]) * QAM16_SCALE,
            qam16_level(bits[2], bits[3]) * QAM16_SCALE,
        ),
    }
}

/// Maps bits (each 0 or 1) to symbols. The first bits of each group select
/// the in-phase level.
pub fn map_symbols(bits: &[u8], scheme: Scheme) -> Result<SymbolFrame> {
    let k = scheme.bits_per_symbol();
    if bits.len() % k != 0 {
        return Err(Error::param(
            "bits",
            format!(
                "{} bits is not a multiple of {k} bits per {scheme} symbol",
                bits.len()
            ),
        ));
    }
    if let Some(i) = bits.iter().position(|&b| b > 1) {
        return Err(Error::param(
            "bits",
            format!("value {} at index {i} is not a bit", bits[i]),
        ));
    }
    Ok(SymbolFrame::new(
        bits.chunks(k).map(|c| map_one(c, scheme)).collect(),
        scheme,
    ))
}

/// Per-axis 16QAM decision. Boundary values resolve toward the smaller bit
/// pattern: -2 -> 00, 0 -> 01, +2 -> 10.
fn qam16_decide(v: f64) -> [u8; 2] {
    let u = v / QAM16_SCALE;
    if u <= -2.0 {
        [0, 0]
    } else if u <= 0.0 {
        [0, 1]
    } else if u < 2.0 {
        [1, 1]
    } else {
        [1, 0]
    }
}

/// Minimum-distance hard decisions; ties go to the lexicographically smallest
/// bit pattern.
pub fn demap_symbols(symbols: &[Complex64], scheme: Scheme) -> Vec<u8> {
    let mut out = Vec::with_capacity(symbols.len() * scheme.bits_per_symbol());
    for s in symbols {
        match scheme {
            Scheme::Qpsk => {
                out.push(u8::from(s.re > 0.0));
                out.push(u8::from(s.im > 0.0));
            }
            Scheme::Qam16 => {
                out.extend_from_slice(&qam16_decide(s.re));
                out.extend_from_slice(&qam16_decide(s.im));
            }
        }
    }
    out
}

/// Nearest constellation point of each symbol.
pub fn slice_symbols(symbols: &[Complex64], scheme: Scheme) -> Vec<Complex64> {
    let bits = demap_symbols(symbols, scheme);
    map_symbols(&bits, scheme)
        .expect("demapper emits whole symbols")
        .symbols
}
