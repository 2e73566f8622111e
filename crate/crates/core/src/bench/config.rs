//! Scenario configuration files.
//!
//! A scenario is a TOML document with one table per subsystem. Every table
//! and key is optional; missing values take the documented defaults and
//! unknown keys are rejected. Sweeps are `[[sweep]]` tables naming a
//! `section.key` parameter and its values; axes combine as a grid, and
//! `linked` parameters move in lockstep with their axis.
//!
//! ```toml
//! [scenario]
//! input_power_dbm = -30.0
//!
//! [dither]
//! frequency = 16e6
//!
//! [[sweep]]
//! parameter = "scenario.input_power_dbm"
//! values = [-70.0, -50.0, -30.0]
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::modem::ofdm::OfdmConfig;
use crate::modem::qam::Scheme;
use crate::modem::rrc::WaveformConfig;
use crate::rrh::{DitherConfig, FrontendConfig, FronthaulImpairment, TransmitterConfig};
use crate::sigma_delta::SdmDesign;

/// Link-level parameters shared by all experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioSection {
    pub rrhs: usize,
    pub ues: usize,
    pub carrier_frequency: f64,
    /// Fronthaul (1-bit) sample rate.
    pub sample_rate: f64,
    pub data_symbols: usize,
    pub preamble_length: usize,
    pub repeats: usize,
    /// Average power of the desired signal at the RRH antenna port.
    pub input_power_dbm: f64,
    /// Symbol-spaced equalizer length; 0 keeps only the scalar fit of the
    /// EVM estimator.
    pub equalizer_taps: usize,
    /// `false` replaces every 1-bit chain with an ideal linear link.
    pub hardware: bool,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        Self {
            rrhs: 1,
            ues: 1,
            carrier_frequency: 2.35e9,
            sample_rate: 10e9,
            data_symbols: 2000,
            preamble_length: 64,
            repeats: 10,
            input_power_dbm: -30.0,
            equalizer_taps: 0,
            hardware: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WaveformKind {
    SingleCarrier,
    Ofdm,
}

/// Transmit waveform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WaveformSection {
    pub kind: WaveformKind,
    pub scheme: Scheme,
    pub symbol_rate: f64,
    pub rolloff: f64,
    pub samples_per_symbol: usize,
    /// Delay-domain window of the OFDM channel estimator, in samples.
    pub delay_window: usize,
    /// OFDM data symbols per frame; 0 picks enough to carry
    /// `scenario.data_symbols` QAM symbols.
    pub ofdm_symbols: usize,
}

impl Default for WaveformSection {
    fn default() -> Self {
        Self {
            kind: WaveformKind::SingleCarrier,
            scheme: Scheme::Qam16,
            symbol_rate: 10e6,
            rolloff: 0.2,
            samples_per_symbol: 8,
            delay_window: 20,
            ofdm_symbols: 0,
        }
    }
}

impl WaveformSection {
    pub fn rrc(&self) -> Result<WaveformConfig> {
        WaveformConfig::new(
            self.scheme,
            self.symbol_rate,
            self.rolloff,
            self.samples_per_symbol,
        )
    }
}

/// Downlink sigma-delta encoder at the CU.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SdmSection {
    pub order: usize,
    /// Band the noise shaping keeps clean, Hz.
    pub bandwidth: f64,
    pub max_ntf_gain: f64,
    /// Drive level of the strongest RRH signal, dBFS.
    pub drive_dbfs: f64,
}

impl Default for SdmSection {
    fn default() -> Self {
        Self {
            order: 4,
            bandwidth: 100e6,
            max_ntf_gain: 1.5,
            drive_dbfs: -12.0,
        }
    }
}

impl SdmSection {
    /// Bandpass design centred on `carrier` at `sample_rate`.
    pub fn design(&self, carrier: f64, sample_rate: f64) -> Result<SdmDesign> {
        let osr = crate::sigma_delta::osr(sample_rate, self.bandwidth)?;
        let d = SdmDesign::bandpass(self.order, carrier / sample_rate, osr)
            .with_max_gain(Some(self.max_ntf_gain));
        d.validate()?;
        Ok(d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    /// Free-space line of sight in the three-RRH, two-UE lab layout.
    Los,
    Rayleigh,
}

/// Propagation and transceiver-gain model for multi-antenna experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelSection {
    pub model: ChannelKind,
    /// Transceiver gains are drawn with magnitude within `+-gain_spread_db`
    /// and uniform phase; 0 makes the system reciprocal.
    pub gain_spread_db: f64,
    /// UE transmit power; with the lab geometry -46 dB of path gain puts
    /// the RRHs near -30 dBm.
    pub ue_tx_power_dbm: f64,
    /// Pilot power of each RRH during over-the-air calibration (ideal
    /// links only; the 1-bit links send the normal downlink level).
    pub sounding_power_dbm: f64,
    /// Receiver noise during ideal-link calibration sounding; `None` is
    /// noiseless.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sounding_noise_dbm: Option<f64>,
}

impl Default for ChannelSection {
    fn default() -> Self {
        Self {
            model: ChannelKind::Los,
            gain_spread_db: 3.0,
            ue_tx_power_dbm: 16.0,
            sounding_power_dbm: 0.0,
            sounding_noise_dbm: None,
        }
    }
}

/// Interference experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InterferenceSection {
    /// `10 log10(P_desired / P_interferer)`.
    pub sir_db: f64,
    /// Symbol rate of both signals in the adjacent-channel experiment.
    pub adjacent_symbol_rate: f64,
    /// Carrier offsets of the two adjacent-channel signals from the
    /// nominal carrier.
    pub adjacent_offsets: [f64; 2],
}

impl Default for InterferenceSection {
    fn default() -> Self {
        Self {
            sir_db: 15.0,
            adjacent_symbol_rate: 4e6,
            adjacent_offsets: [-2.5e6, 2.5e6],
        }
    }
}

/// One sweep axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    /// `section.key` of the swept parameter.
    pub parameter: String,
    pub values: Vec<f64>,
    /// Parameters that take their i-th value together with the axis.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub linked: Vec<LinkedParameter>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkedParameter {
    pub parameter: String,
    pub values: Vec<f64>,
}

impl SweepAxis {
    pub fn new(parameter: &str, values: &[f64]) -> Self {
        Self {
            parameter: parameter.to_string(),
            values: values.to_vec(),
            linked: Vec::new(),
        }
    }

    pub fn linked(mut self, parameter: &str, values: &[f64]) -> Self {
        self.linked.push(LinkedParameter {
            parameter: parameter.to_string(),
            values: values.to_vec(),
        });
        self
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// Write the equalized symbols of every point as text.
    pub constellation: bool,
}

/// A complete, validated scenario.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub scenario: ScenarioSection,
    pub waveform: WaveformSection,
    pub ofdm: OfdmConfig,
    pub sdm: SdmSection,
    pub frontend: FrontendConfig,
    pub dither: DitherConfig,
    pub fronthaul: FronthaulImpairment,
    pub transmitter: TransmitterConfig,
    pub channel: ChannelSection,
    pub interference: InterferenceSection,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepAxis>,
    pub output: OutputSection,
}

fn config_err(key: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        reason: reason.into(),
    }
}

/// Maps a sub-config's validation error onto its section.
fn section<T>(key: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::InvalidParameter { name, reason } => config_err(&format!("{key}.{name}"), reason),
        other => config_err(key, other.to_string()),
    })
}

impl ScenarioConfig {
    /// Parses TOML text and validates the result.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| {
            let key = e
                .span()
                .map(|s| text[s].to_string())
                .unwrap_or_else(|| "<document>".into());
            config_err(&key, e.message().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// The fully resolved configuration, defaults included, as TOML.
    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario config is always representable as TOML")
    }

    /// SHA-256 of the resolved configuration.
    pub fn fingerprint(&self) -> String {
        let digest = Sha256::digest(self.to_toml_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.scenario;
        if s.rrhs == 0 || s.ues == 0 {
            return Err(config_err(
                "scenario.rrhs",
                "need at least one RRH and one UE",
            ));
        }
        if s.ues > 4 {
            return Err(config_err(
                "scenario.ues",
                "at most 4 orthogonal UE pilots are supported",
            ));
        }
        if !(s.sample_rate > 0.0 && s.sample_rate.is_finite()) {
            return Err(config_err("scenario.sample_rate", "must be finite and > 0"));
        }
        if !(s.carrier_frequency > 0.0 && s.carrier_frequency < s.sample_rate / 2.0) {
            return Err(config_err(
                "scenario.carrier_frequency",
                "must lie in (0, sample_rate / 2)",
            ));
        }
        if s.data_symbols < 16 {
            return Err(config_err(
                "scenario.data_symbols",
                "need at least 16 symbols for an EVM",
            ));
        }
        if s.preamble_length < 16 || s.preamble_length % 4 != 0 {
            return Err(config_err(
                "scenario.preamble_length",
                "must be a multiple of 4 and >= 16",
            ));
        }
        if s.repeats == 0 {
            return Err(config_err("scenario.repeats", "must be >= 1"));
        }
        if !s.input_power_dbm.is_finite() {
            return Err(config_err("scenario.input_power_dbm", "must be finite"));
        }
        if s.equalizer_taps > 0 && s.data_symbols < 4 * s.equalizer_taps {
            return Err(config_err(
                "scenario.equalizer_taps",
                format!(
                    "{} data symbols cannot train {} taps",
                    s.data_symbols, s.equalizer_taps
                ),
            ));
        }
        section("waveform", self.waveform.rrc())?;
        if self.waveform.delay_window == 0 {
            return Err(config_err("waveform.delay_window", "must be >= 1"));
        }
        section("ofdm", self.ofdm.validate())?;
        if self.waveform.kind == WaveformKind::Ofdm
            && self.waveform.delay_window > self.ofdm.occupied_subcarriers
        {
            return Err(config_err(
                "waveform.delay_window",
                "cannot exceed the occupied subcarriers",
            ));
        }
        section("sdm", self.sdm.design(s.carrier_frequency, s.sample_rate))?;
        section("frontend", self.frontend.validate())?;
        if self.dither.enabled {
            section("dither", self.dither.validate(s.sample_rate))?;
        }
        section("fronthaul", self.fronthaul.validate())?;
        if !(self.transmitter.oe_output_amplitude > 0.0) {
            return Err(config_err("transmitter.oe_output_amplitude", "must be > 0"));
        }
        let c = &self.channel;
        if !(c.gain_spread_db >= 0.0 && c.gain_spread_db.is_finite()) {
            return Err(config_err(
                "channel.gain_spread_db",
                "must be finite and >= 0",
            ));
        }
        if !c.ue_tx_power_dbm.is_finite() || !c.sounding_power_dbm.is_finite() {
            return Err(config_err("channel", "powers must be finite"));
        }
        let i = &self.interference;
        if i.sir_db.is_nan() {
            return Err(config_err("interference.sir_db", "must not be NaN"));
        }
        if !(i.adjacent_symbol_rate > 0.0) {
            return Err(config_err(
                "interference.adjacent_symbol_rate",
                "must be > 0",
            ));
        }
        for ax in &self.sweep {
            if ax.values.iter().any(|v| !v.is_finite()) {
                return Err(config_err(&ax.parameter, "sweep values must be finite"));
            }
            for l in &ax.linked {
                if l.values.len() != ax.values.len() {
                    return Err(config_err(
                        &l.parameter,
                        format!(
                            "linked to `{}` but has {} values instead of {}",
                            ax.parameter,
                            l.values.len(),
                            ax.values.len()
                        ),
                    ));
                }
                if l.values.iter().any(|v| !v.is_finite()) {
                    return Err(config_err(&l.parameter, "sweep values must be finite"));
                }
            }
            // check the parameter exists and accepts numbers
            if let Some(&v) = ax.values.first() {
                self.with_parameter(&ax.parameter, v)?;
            }
        }
        Ok(())
    }

    /// A copy with `section.key` set to `value`. Integer-typed keys accept
    /// integral values only.
    pub fn with_parameter(&self, path: &str, value: f64) -> Result<Self> {
        let mut root = toml::Value::try_from(self).map_err(|e| config_err(path, e.to_string()))?;
        let parts: Vec<&str> = path.split('.').collect();
        let (leaf, sections) = parts
            .split_last()
            .ok_or_else(|| config_err(path, "empty parameter path"))?;
        let mut node = &mut root;
        for part in sections {
            node = node
                .as_table_mut()
                .ok_or_else(|| config_err(path, "is not a table path"))?
                .get_mut(*part)
                .ok_or_else(|| config_err(path, format!("unknown section `{part}`")))?;
        }
        let table = node
            .as_table_mut()
            .ok_or_else(|| config_err(path, "is not a table path"))?;
        let new = match table.get(*leaf) {
            Some(toml::Value::Integer(_)) => {
                if value.fract() != 0.0 || value < 0.0 {
                    return Err(config_err(
                        path,
                        format!("expects a non-negative integer, got {value}"),
                    ));
                }
                toml::Value::Integer(value as i64)
            }
            Some(toml::Value::Float(_)) => toml::Value::Float(value),
            None if optional_numeric(path) => toml::Value::Float(value),
            None => return Err(config_err(path, "unknown parameter")),
            Some(_) => return Err(config_err(path, "is not a numeric parameter")),
        };
        table.insert(leaf.to_string(), new);
        let cfg: ScenarioConfig = root
            .try_into()
            .map_err(|e: toml::de::Error| config_err(path, e.message().to_string()))?;
        Ok(cfg)
    }

    /// Applies one grid point's values.
    pub fn at_point(&self, axes: &[SweepAxis], index: &[usize]) -> Result<Self> {
        let mut cfg = self.clone();
        for (ax, &i) in axes.iter().zip(index) {
            cfg = cfg.with_parameter(&ax.parameter, ax.values[i])?;
            for l in &ax.linked {
                cfg = cfg.with_parameter(&l.parameter, l.values[i])?;
            }
        }
        cfg.sweep.clear();
        cfg.validate()?;
        Ok(cfg)
    }

    /// Number of QAM symbols per preamble.
    pub fn preamble_length(&self) -> usize {
        self.scenario.preamble_length
    }
}

/// Optional numeric keys that are absent from the serialized form when
/// unset.
fn optional_numeric(path: &str) -> bool {
    matches!(path, "channel.sounding_noise_dbm")
}

/// Reads and validates a scenario file.
pub fn parse_config(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let cfg = ScenarioConfig::from_toml_str(&text)?;
    log::debug!(
        "resolved configuration {}:\n{}",
        path.display(),
        cfg.to_toml_string()
    );
    Ok(cfg)
}
