//! Receive front end parameters, the Friis noise cascade and the AGC.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sigcore::fir::FilterSpec;
use crate::sigcore::power::{
    db_to_amplitude, db_to_power, mean_square_to_dbm, power_to_db, THERMAL_NOISE_DBM_PER_HZ,
};
use crate::sigcore::signal::PassbandSignal;

/// AGC behaviour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgcMode {
    /// Re-measure the power at the start of every hold window.
    Track,
    /// Freeze the VGA at the given gain (dB); still clamped to the range.
    Hold(f64),
}

/// RRH receiver configuration.
///
/// Levels follow the physical chain: antenna -> BPF -> LNA -> passive
/// losses -> VGA (AGC) -> RF amplifier -> comparator. The dither path is
/// O/E converter -> LPF -> IF amplifier -> comparator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FrontendConfig {
    pub bpf_enabled: bool,
    pub bpf_low: f64,
    pub bpf_high: f64,
    pub bpf_transition: f64,
    pub lpf_cutoff: f64,
    pub lpf_transition: f64,
    pub filter_atten_db: f64,

    pub lna_gain_db: f64,
    pub lna_nf_db: f64,
    /// Switch, coupler and cabling loss between LNA and RF amplifier.
    pub passive_loss_db: f64,
    pub vga_nf_db: f64,
    pub rf_amp_gain_db: f64,
    pub rf_amp_nf_db: f64,
    pub if_gain_db: f64,
    /// Peak voltage of the O/E converter output driving the dither LPF.
    pub oe_output_amplitude: f64,

    pub agc_target_dbm: f64,
    pub agc_gain_min_db: f64,
    pub agc_gain_max_db: f64,
    /// Seconds during which the VGA control voltage is held.
    pub agc_hold: f64,
    pub agc_mode: AgcMode,

    /// Lumped receiver noise, referred to the comparator input.
    pub noise_enabled: bool,
    /// Noise power in `noise_reference_bandwidth`, dBm.
    pub noise_dbm: f64,
    pub noise_reference_bandwidth: f64,
    /// Band occupied by the noise (the receive band).
    pub noise_low: f64,
    pub noise_high: f64,
}

impl Default for FrontendConfig {
    fn default() -> Self {
        Self {
            bpf_enabled: true,
            bpf_low: 2.3e9,
            bpf_high: 2.4e9,
            bpf_transition: 50e6,
            lpf_cutoff: 180e6,
            lpf_transition: 60e6,
            filter_atten_db: 60.0,
            lna_gain_db: 24.0,
            lna_nf_db: 1.5,
            passive_loss_db: 7.5,
            vga_nf_db: 12.5,
            rf_amp_gain_db: 29.5,
            rf_amp_nf_db: 2.7,
            if_gain_db: 15.0,
            oe_output_amplitude: 0.4,
            agc_target_dbm: -30.0,
            agc_gain_min_db: -30.0,
            agc_gain_max_db: 15.0,
            agc_hold: 1e-3,
            agc_mode: AgcMode::Track,
            noise_enabled: true,
            noise_dbm: -26.6,
            noise_reference_bandwidth: 100e6,
            noise_low: 2.3e9,
            noise_high: 2.4e9,
        }
    }
}

impl FrontendConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.agc_gain_min_db < self.agc_gain_max_db) {
            return Err(Error::param(
                "agc_gain_range",
                format!(
                    "empty range [{}, {}] dB",
                    self.agc_gain_min_db, self.agc_gain_max_db
                ),
            ));
        }
        for (name, v) in [
            ("lna_nf_db", self.lna_nf_db),
            ("vga_nf_db", self.vga_nf_db),
            ("rf_amp_nf_db", self.rf_amp_nf_db),
        ] {
            if !(v >= 0.0) {
                return Err(Error::param(
                    name,
                    format!("noise figure must be >= 0 dB, got {v}"),
                ));
            }
        }
        if !(self.agc_hold > 0.0) {
            return Err(Error::param("agc_hold", "must be > 0"));
        }
        if !(self.oe_output_amplitude > 0.0) {
            return Err(Error::param("oe_output_amplitude", "must be > 0"));
        }
        if self.noise_enabled && !(self.noise_high > self.noise_low && self.noise_low >= 0.0) {
            return Err(Error::param(
                "noise band",
                "need 0 <= noise_low < noise_high",
            ));
        }
        if !(self.noise_reference_bandwidth > 0.0) {
            return Err(Error::param("noise_reference_bandwidth", "must be > 0"));
        }
        Ok(())
    }

    pub fn bpf_spec(&self) -> FilterSpec {
        FilterSpec::bandpass(
            self.bpf_low,
            self.bpf_high,
            self.bpf_transition,
            self.filter_atten_db,
        )
    }

    pub fn lpf_spec(&self) -> FilterSpec {
        FilterSpec::lowpass(self.lpf_cutoff, self.lpf_transition, self.filter_atten_db)
    }

    /// Fixed gain from the antenna to the VGA input.
    pub fn pre_agc_gain_db(&self) -> f64 {
        self.lna_gain_db - self.passive_loss_db
    }

    /// Gain applied to the +-1 V dither stream before the comparator.
    pub fn dither_gain_db(&self) -> f64 {
        self.if_gain_db + 20.0 * self.oe_output_amplitude.log10()
    }

    /// Total noise power added at the comparator, dBm.
    pub fn noise_power_dbm(&self) -> f64 {
        self.noise_dbm
            + power_to_db((self.noise_high - self.noise_low) / self.noise_reference_bandwidth)
    }

    /// Noise stages of the receive chain with the VGA at `vga_gain_db`.
    pub fn stages(&self, vga_gain_db: f64) -> Vec<Stage> {
        vec![
            Stage::new(self.lna_gain_db, self.lna_nf_db),
            Stage::new(-self.passive_loss_db, self.passive_loss_db),
            Stage::new(vga_gain_db, self.vga_nf_db),
            Stage::new(self.rf_amp_gain_db, self.rf_amp_nf_db),
        ]
    }
}

/// One amplifier or lossy element of a cascade.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stage {
    pub gain_db: f64,
    pub nf_db: f64,
}

impl Stage {
    pub fn new(gain_db: f64, nf_db: f64) -> Self {
        Self { gain_db, nf_db }
    }
}

/// Result of a Friis cascade.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseCascade {
    pub noise_figure_db: f64,
    pub gain_db: f64,
    /// Input-referred noise power in the bandwidth (thermal floor + NF).
    pub input_noise_dbm: f64,
    /// The same noise at the cascade output.
    pub output_noise_dbm: f64,
}

/// `F = F1 + sum_k (F_k - 1) / (G_1 ... G_{k-1})` at 290 K.
pub fn friis_cascade(stages: &[Stage], bandwidth: f64) -> Result<NoiseCascade> {
    if stages.is_empty() {
        return Err(Error::param("stages", "cascade needs at least one stage"));
    }
    if !(bandwidth > 0.0) {
        return Err(Error::param("bandwidth", "must be > 0"));
    }
    let mut f = 0.0;
    let mut g = 1.0;
    for (k, s) in stages.iter().enumerate() {
        let fk = db_to_power(s.nf_db);
        f += if k == 0 { fk } else { (fk - 1.0) / g };
        g *= db_to_power(s.gain_db);
    }
    let nf = power_to_db(f);
    let gain = power_to_db(g);
    let input = THERMAL_NOISE_DBM_PER_HZ + power_to_db(bandwidth) + nf;
    Ok(NoiseCascade {
        noise_figure_db: nf,
        gain_db: gain,
        input_noise_dbm: input,
        output_noise_dbm: input + gain,
    })
}

/// VGA state over one hold window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgcState {
    pub gain_db: f64,
    /// Power seen by the detector over the window.
    pub measured_dbm: f64,
    /// Time the gain stays frozen, in seconds.
    pub hold_remaining: f64,
}

/// Splits `rf` into hold windows; for each, measures the true RMS power and
/// applies `clamp(target - measured)` (or the held gain) for the whole window.
///
/// Returns the scaled signal and one [`AgcState`] per window.
pub fn agc(rf: &PassbandSignal, cfg: &FrontendConfig) -> Result<(PassbandSignal, Vec<AgcState>)> {
    cfg.validate()?;
    let window = ((cfg.agc_hold * rf.rate()).round() as usize).max(1);
    let mut out = Vec::with_capacity(rf.len());
    let mut trace = Vec::new();
    for chunk in rf.samples().chunks(window) {
        let ms = chunk.iter().map(|v| v * v).sum::<f64>() / chunk.len() as f64;
        let measured = mean_square_to_dbm(ms);
        let want = match cfg.agc_mode {
            AgcMode::Track => cfg.agc_target_dbm - measured,
            AgcMode::Hold(g) => g,
        };
        // a silent window measures -inf dBm and drives the VGA to full gain
        let gain = want.clamp(cfg.agc_gain_min_db, cfg.agc_gain_max_db);
        let a = db_to_amplitude(gain);
        out.extend(chunk.iter().map(|v| v * a));
        trace.push(AgcState {
            gain_db: gain,
            measured_dbm: measured,
            hold_remaining: chunk.len() as f64 / rf.rate(),
        });
    }
    Ok((PassbandSignal::new(out, rf.rate())?, trace))
}
