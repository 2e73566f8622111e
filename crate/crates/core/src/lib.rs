//! Link-level simulator for a TDD distributed-MIMO system whose remote radio
//! heads are connected to the central unit by a 1-bit radio-over-fiber
//! fronthaul.
//!
//! The downlink is bandpass sigma-delta encoded at the central unit and
//! reconstructed by a bandpass filter at each radio head; the uplink is
//! quantized by a comparator against a sigma-delta encoded triangular dither.
//! Everything is simulated sample by sample at the fronthaul rate.
//!
//! Modules, bottom up:
//! - [`sigcore`]: signal types, power convention, filters, mixing, resampling, PSD
//! - [`modem`]: QAM mapping, RRC single-carrier and OFDM waveforms, pilots
//! - [`sigma_delta`]: NTF synthesis and 1-bit loop simulation
//! - [`rrh`]: radio-head analog chain and fronthaul transport
//! - [`channel`]: reciprocal MIMO channel with non-reciprocal transceivers
//! - [`cu_dsp`]: channel estimation, equalization, zero-forcing
//! - [`calibration`]: over-the-air reciprocity calibration
//! - [`bench`]: configs, named experiments, EVM metrology, result files

pub mod bench;
pub mod calibration;
pub mod channel;
pub mod cu_dsp;
pub mod error;
pub mod modem;
pub mod rrh;
pub mod sigcore;
pub mod sigma_delta;

pub use error::{Error, Result};
