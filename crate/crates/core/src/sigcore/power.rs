//! Amplitude/power conversions. Every level in the simulator is dBm into a
//! 50-ohm reference; all conversions go through this module.

use num_complex::Complex64;

pub const REFERENCE_OHMS: f64 = 50.0;

/// Thermal noise density at 290 K.
pub const THERMAL_NOISE_DBM_PER_HZ: f64 = -174.0;

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

/// RMS voltage of a signal with the given power.
pub fn dbm_to_vrms(dbm: f64) -> f64 {
    (dbm_to_watts(dbm) * REFERENCE_OHMS).sqrt()
}

pub fn vrms_to_dbm(vrms: f64) -> f64 {
    watts_to_dbm(vrms * vrms / REFERENCE_OHMS)
}

/// Mean-square voltage to dBm.
pub fn mean_square_to_dbm(ms: f64) -> f64 {
    watts_to_dbm(ms / REFERENCE_OHMS)
}

pub fn db_to_amplitude(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

pub fn db_to_power(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn power_to_db(p: f64) -> f64 {
    10.0 * p.log10()
}

pub fn mean_square(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
}

pub fn mean_square_complex(x: &[Complex64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().map(|v| v.norm_sqr()).sum::<f64>() / x.len() as f64
}

pub fn real_power_dbm(x: &[f64]) -> f64 {
    mean_square_to_dbm(mean_square(x))
}

pub fn complex_power_dbm(x: &[Complex64]) -> f64 {
    mean_square_to_dbm(mean_square_complex(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_dbm_is_one_milliwatt() {
        assert!((dbm_to_watts(0.0) - 1e-3).abs() < 1e-15);
        assert!((dbm_to_vrms(0.0) - (0.05f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn conversions_round_trip() {
        for dbm in [-120.0, -26.6, -4.5, 0.0, 13.0] {
            assert!((vrms_to_dbm(dbm_to_vrms(dbm)) - dbm).abs() < 1e-9);
            assert!((watts_to_dbm(dbm_to_watts(dbm)) - dbm).abs() < 1e-9);
        }
    }

    #[test]
    fn sine_power() {
        // 1 V peak sine: 0.5 V^2 mean square -> 10 mW -> 10 dBm
        let x: Vec<f64> = (0..1000)
            .map(|n| (2.0 * std::f64::consts::PI * n as f64 / 100.0).sin())
            .collect();
        assert!((real_power_dbm(&x) - 10.0).abs() < 1e-9);
    }
}
