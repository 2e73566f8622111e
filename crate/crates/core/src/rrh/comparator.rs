//! The RRH comparator: RF on the non-inverting input, dither on the
//! inverting one.

use crate::error::{Error, Result};
use crate::sigcore::signal::{BinaryStream, PassbandSignal};

/// `out[n] = +1` if `rf[n] >= dither[n]`, else `-1`. Ideal: no hysteresis,
/// ties resolve to `+1`.
pub fn comparator_encode(rf: &PassbandSignal, dither: &PassbandSignal) -> Result<BinaryStream> {
    if rf.rate() != dither.rate() {
        return Err(Error::param(
            "dither",
            format!(
                "rate {} Hz differs from RF rate {} Hz",
                dither.rate(),
                rf.rate()
            ),
        ));
    }
    if rf.len() != dither.len() {
        return Err(Error::DimensionMismatch(format!(
            "RF has {} samples, dither {}",
            rf.len(),
            dither.len()
        )));
    }
    let bits = rf
        .samples()
        .iter()
        .zip(dither.samples())
        .map(|(&r, &d)| if r >= d { 1 } else { -1 })
        .collect();
    Ok(BinaryStream::from_raw(bits, rf.rate()))
}
