//! Symbol mapping, single-carrier RRC and OFDM waveforms, and pilot
//! sequences.

pub mod ofdm;
pub mod qam;
pub mod rrc;
pub mod zc;

pub use ofdm::{ofdm_demodulate, ofdm_modulate, ofdm_pilot, OfdmConfig};
pub use qam::{demap_symbols, map_symbols, slice_symbols, Scheme, SymbolFrame};
pub use rrc::{rrc_demodulate, rrc_modulate, Timing, WaveformConfig};
pub use zc::{orthogonal_pilots, zadoff_chu};

use rand::Rng;

/// Uniformly random bits.
pub fn random_bits<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<u8> {
    (0..n).map(|_| rng.random_range(0..2u8)).collect()
}

/// A frame of `n` random symbols.
pub fn random_frame<R: Rng + ?Sized>(rng: &mut R, scheme: Scheme, n: usize) -> SymbolFrame {
    let bits = random_bits(rng, n * scheme.bits_per_symbol());
    map_symbols(&bits, scheme).expect("whole number of symbols")
}
