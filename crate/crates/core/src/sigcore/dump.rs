//! Flat binary dumps of signal buffers for offline inspection.
//!
//! Layout (little-endian): `kind: u8`, `rate: f64`, `length: u64`, then the
//! samples as `f64` (`re, im` interleaved for baseband, `+-1.0` for binary
//! streams). Baseband dumps append the centre frequency after the rate.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sigcore::signal::{BasebandSignal, BinaryStream, PassbandSignal};

const KIND_PASSBAND: u8 = 1;
const KIND_BASEBAND: u8 = 2;
const KIND_BINARY: u8 = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum Dump {
    Passband(PassbandSignal),
    Baseband(BasebandSignal),
    Binary(BinaryStream),
}

fn header(kind: u8, rate: f64, len: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(17);
    out.push(kind);
    out.extend_from_slice(&rate.to_le_bytes());
    out.extend_from_slice(&(len as u64).to_le_bytes());
    out
}

/// Serializes a signal into the dump format.
pub fn encode(d: &Dump) -> Vec<u8> {
    match d {
        Dump::Passband(s) => {
            let mut out = header(KIND_PASSBAND, s.rate(), s.len());
            s.samples()
                .iter()
                .for_each(|v| out.extend_from_slice(&v.to_le_bytes()));
            out
        }
        Dump::Baseband(s) => {
            let mut out = header(KIND_BASEBAND, s.rate(), s.len());
            out.extend_from_slice(&s.center_frequency().to_le_bytes());
            for v in s.samples() {
                out.extend_from_slice(&v.re.to_le_bytes());
                out.extend_from_slice(&v.im.to_le_bytes());
            }
            out
        }
        Dump::Binary(s) => {
            let mut out = header(KIND_BINARY, s.rate(), s.len());
            s.samples()
                .iter()
                .for_each(|&v| out.extend_from_slice(&(v as f64).to_le_bytes()));
            out
        }
    }
}

fn take_f64(bytes: &[u8], pos: &mut usize) -> Result<f64> {
    let end = *pos + 8;
    let chunk = bytes
        .get(*pos..end)
        .ok_or_else(|| Error::param("dump", "truncated buffer"))?;
    *pos = end;
    Ok(f64::from_le_bytes(chunk.try_into().expect("8-byte slice")))
}

/// Parses a dump produced by [`encode`].
pub fn decode(bytes: &[u8]) -> Result<Dump> {
    let kind = *bytes
        .first()
        .ok_or_else(|| Error::param("dump", "empty buffer"))?;
    let mut pos = 1;
    let rate = take_f64(bytes, &mut pos)?;
    let len_bytes = bytes
        .get(pos..pos + 8)
        .ok_or_else(|| Error::param("dump", "truncated header"))?;
    let len = u64::from_le_bytes(len_bytes.try_into().expect("8-byte slice")) as usize;
    pos += 8;
    match kind {
        KIND_PASSBAND => {
            let v = (0..len)
                .map(|_| take_f64(bytes, &mut pos))
                .collect::<Result<Vec<_>>>()?;
            Ok(Dump::Passband(PassbandSignal::new(v, rate)?))
        }
        KIND_BASEBAND => {
            let fc = take_f64(bytes, &mut pos)?;
            let v = (0..len)
                .map(|_| {
                    Ok(Complex64::new(
                        take_f64(bytes, &mut pos)?,
                        take_f64(bytes, &mut pos)?,
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Dump::Baseband(BasebandSignal::new(v, rate, fc)?))
        }
        KIND_BINARY => {
            let v = (0..len)
                .map(|_| take_f64(bytes, &mut pos).map(|x| x as i8))
                .collect::<Result<Vec<_>>>()?;
            Ok(Dump::Binary(BinaryStream::new(v, rate)?))
        }
        other => Err(Error::param("dump", format!("unknown kind tag {other}"))),
    }
}

pub fn write_dump(path: impl AsRef<Path>, d: &Dump) -> Result<()> {
    let path = path.as_ref();
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&encode(d)).map_err(|e| Error::io(path, e))
}

pub fn read_dump(path: impl AsRef<Path>) -> Result<Dump> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut buf))
        .map_err(|e| Error::io(path, e))?;
    decode(&buf)
}
