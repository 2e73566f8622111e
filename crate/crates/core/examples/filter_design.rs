//! FIR design, filtering and rational resampling.
//!
//! Designs the RRH band-select filter and a channel-selection lowpass,
//! reports tap counts and the response at a few frequencies, then pushes a
//! two-tone RF capture through the filter and measures what survives.
//!
//! ```bash
//! cargo run --release --example filter_design
//! ```

use std::f64::consts::PI;

use rofsim::error::Result;
use rofsim::sigcore::resample::rate_ratio;
use rofsim::sigcore::{apply_filter, design_fir, welch_psd, Delay, FilterSpec, PassbandSignal};

fn main() -> Result<()> {
    let fs = 10e9;
    let bpf = design_fir(&FilterSpec::bandpass(2.3e9, 2.4e9, 50e6, 60.0), fs)?;
    println!("band-select 2.30-2.40 GHz at {:.0} GS/s: {} taps, group delay {:.1} samples", fs / 1e9, bpf.len(), bpf.group_delay());
    for f in [1.8e9, 2.25e9, 2.3e9, 2.35e9, 2.4e9, 2.45e9, 3.0e9] {
        println!("  {:>6.3} GHz  {:>7.2} dB", f / 1e9, 20.0 * bpf.magnitude_at(f, fs).log10());
    }

    let lpf = design_fir(&FilterSpec::lowpass(7.5e6, 5e6, 60.0), 80e6)?;
    println!("channel select 7.5 MHz at 80 MS/s: {} taps", lpf.len());

    // in-band tone at 2.35 GHz plus a blocker at 2.0 GHz, 200 us capture
    let n = 2_000_000;
    let x: Vec<f64> = (0..n)
        .map(|k| {
            let t = k as f64 / fs;
            0.1 * (2.0 * PI * 2.35e9 * t).cos() + 0.1 * (2.0 * PI * 2.0e9 * t).cos()
        })
        .collect();
    let rf = PassbandSignal::new(x, fs)?;
    let y = apply_filter(&rf, bpf.taps(), Delay::Compensate)?;
    for (label, s) in [("before", &rf), ("after ", &y)] {
        let psd = welch_psd(s, 1 << 14, 0.5)?;
        let p = |lo: f64, hi: f64| 10.0 * psd.band_power(lo, hi).log10() - 10.0 * 50f64.log10() + 30.0;
        println!("{label} filtering: 2.35 GHz tone {:>7.2} dBm, 2.00 GHz blocker {:>7.2} dBm", p(2.34e9, 2.36e9), p(1.99e9, 2.01e9));
    }

    for (from, to) in [(122.88e6, 10e9), (10e6 * 8.0, 10e9), (10e9, 20e9)] {
        let (p, q) = rate_ratio(from, to)?;
        println!("resample {:.2} MS/s -> {:.2} MS/s: up {p}, down {q}", from / 1e6, to / 1e6);
    }
    Ok(())
}
