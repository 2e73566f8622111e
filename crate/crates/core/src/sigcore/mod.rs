//! Signal-processing primitives shared by every other module: signal types,
//! the dBm/50-ohm power convention, FIR design and application, mixing,
//! rational resampling, spectral estimation and debug dumps.

pub mod dump;
pub mod filter;
pub mod fir;
pub mod mix;
pub mod power;
pub mod psd;
pub mod resample;
pub mod signal;

pub use filter::{apply_filter, apply_filter_baseband, Delay};
pub use fir::{design_fir, design_fir_cached, FilterKind, FilterSpec, Fir};
pub use mix::{downconvert, upconvert, Oscillator};
pub use psd::{welch_psd, welch_psd_baseband, Psd};
pub use resample::{resample_rational, resample_rational_baseband, resample_to_rate};
pub use signal::{BasebandSignal, BinaryStream, PassbandSignal};
