//! Complete RRH chains.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rrh::comparator::comparator_encode;
use crate::rrh::dither::{generate_dither, reconstruct_dither, DitherConfig};
use crate::rrh::frontend::{agc, AgcState, FrontendConfig};
use crate::rrh::fronthaul::{fronthaul_transport, FronthaulImpairment};
use crate::rrh::noise::band_limited_noise;
use crate::sigcore::filter::{apply_filter, Delay};
use crate::sigcore::fir::{design_fir_cached, FilterSpec};
use crate::sigcore::signal::{BinaryStream, PassbandSignal};

/// What the uplink chain produced for one RRH.
#[derive(Debug, Clone)]
pub struct UplinkOutput {
    /// Bits as sampled by the CU.
    pub stream: BinaryStream,
    /// VGA state per hold window.
    pub agc: Vec<AgcState>,
    /// Signal power at the comparator, noise excluded, dBm.
    pub comparator_signal_dbm: f64,
    /// Reconstructed dither power at the comparator, dBm.
    pub comparator_dither_dbm: f64,
}

/// Runs one RRH receiver: BPF -> LNA and losses -> AGC -> RF amplifier ->
/// lumped noise -> comparator against the reconstructed dither -> fronthaul.
///
/// `rf_at_antenna` must be at the fronthaul rate. All randomness (noise,
/// sampler jitter) comes from `seed`.
pub fn uplink_rrh_chain(
    rf_at_antenna: &PassbandSignal,
    frontend: &FrontendConfig,
    dither: &DitherConfig,
    imp: &FronthaulImpairment,
    seed: u64,
) -> Result<UplinkOutput> {
    frontend.validate()?;
    let fs = rf_at_antenna.rate();
    if rf_at_antenna.is_empty() {
        return Ok(UplinkOutput {
            stream: BinaryStream::new(Vec::new(), fs)?,
            agc: Vec::new(),
            comparator_signal_dbm: f64::NEG_INFINITY,
            comparator_dither_dbm: f64::NEG_INFINITY,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let filtered = if frontend.bpf_enabled {
        let bpf = design_fir_cached(&frontend.bpf_spec(), fs)?;
        apply_filter(rf_at_antenna, bpf.taps(), Delay::Compensate)?
    } else {
        rf_at_antenna.clone()
    };
    let pre = filtered.amplify(frontend.pre_agc_gain_db());
    let (levelled, trace) = agc(&pre, frontend)?;
    let amplified = levelled.amplify(frontend.rf_amp_gain_db);
    let comparator_signal_dbm = amplified.power_dbm();

    let mut rf = amplified.into_samples();
    if frontend.noise_enabled {
        let band = (frontend.noise_low, frontend.noise_high);
        let noise = band_limited_noise(&mut rng, rf.len(), fs, band, frontend.noise_power_dbm())?;
        rf.iter_mut().zip(&noise).for_each(|(r, n)| *r += n);
    }
    let rf = PassbandSignal::new(rf, fs)?;

    let dither_wave = if dither.enabled {
        let (_, encoded) = generate_dither(dither, fs, rf.len())?;
        reconstruct_dither(&encoded, &frontend.lpf_spec(), frontend.dither_gain_db())?
    } else {
        PassbandSignal::zeros(rf.len(), fs)?
    };
    let comparator_dither_dbm = dither_wave.power_dbm();

    let bits = comparator_encode(&rf, &dither_wave)?;
    let stream = fronthaul_transport(&bits, imp, fs, &mut rng)?;
    Ok(UplinkOutput {
        stream,
        agc: trace,
        comparator_signal_dbm,
        comparator_dither_dbm,
    })
}

/// RRH transmitter: O/E converter, reconstruction BPF and PA.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransmitterConfig {
    pub bpf_low: f64,
    pub bpf_high: f64,
    pub bpf_transition: f64,
    pub filter_atten_db: f64,
    /// Peak voltage of the O/E converter output.
    pub oe_output_amplitude: f64,
    pub pa_gain_db: f64,
}

impl Default for TransmitterConfig {
    fn default() -> Self {
        Self {
            bpf_low: 2.3e9,
            bpf_high: 2.4e9,
            bpf_transition: 50e6,
            filter_atten_db: 60.0,
            oe_output_amplitude: 0.4,
            pa_gain_db: 35.8,
        }
    }
}

impl TransmitterConfig {
    pub fn bpf_spec(&self) -> FilterSpec {
        FilterSpec::bandpass(
            self.bpf_low,
            self.bpf_high,
            self.bpf_transition,
            self.filter_atten_db,
        )
    }
}

/// Downlink RRH: the CU's 1-bit stream crosses the fiber, is converted to
/// `+-oe_output_amplitude` volts, bandpass filtered and amplified. Output is
/// the RF waveform at the antenna port.
pub fn downlink_rrh_chain(
    stream: &BinaryStream,
    cfg: &TransmitterConfig,
    imp: &FronthaulImpairment,
    seed: u64,
) -> Result<PassbandSignal> {
    if !(cfg.oe_output_amplitude > 0.0) {
        return Err(Error::param("oe_output_amplitude", "must be > 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rx = fronthaul_transport(stream, imp, stream.rate(), &mut rng)?;
    if rx.is_empty() {
        return PassbandSignal::new(Vec::new(), stream.rate());
    }
    let electrical = rx.to_passband(cfg.oe_output_amplitude);
    let bpf = design_fir_cached(&cfg.bpf_spec(), stream.rate())?;
    Ok(apply_filter(&electrical, bpf.taps(), Delay::Compensate)?.amplify(cfg.pa_gain_db))
}
