//! Remote radio head: the analog receive and transmit chains and the 1-bit
//! optical fronthaul between the RRH and the central unit.
//!
//! Uplink, per RRH:
//!
//! ```text
//! antenna -> BPF -> LNA/losses -> AGC (VGA) -> RF amp -> (+ noise)
//!         -> comparator(+, reconstructed dither on -) -> fiber -> CU sampler
//! ```
//!
//! Downlink: CU 1-bit stream -> fiber -> BPF -> PA -> antenna.

pub mod chain;
pub mod comparator;
pub mod dither;
pub mod frontend;
pub mod fronthaul;
pub mod noise;

pub use chain::{downlink_rrh_chain, uplink_rrh_chain, TransmitterConfig, UplinkOutput};
pub use comparator::comparator_encode;
pub use dither::{generate_dither, reconstruct_dither, triangle_wave, DitherConfig, DitherShape};
pub use frontend::{agc, friis_cascade, AgcMode, AgcState, FrontendConfig, NoiseCascade, Stage};
pub use fronthaul::{edge_kernel, fronthaul_transport, smooth_levels, FronthaulImpairment};
pub use noise::band_limited_noise;
