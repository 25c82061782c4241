//! Binary frame format.
//!
//! A 16-byte little-endian header (`b"HLCF"`, cells, pulses, flags) followed
//! by cell-major interleaved `f32` real/imaginary pairs. Bits 0-1 of `flags`
//! hold the polarization code; the remaining bits must be zero.

use super::{ClutterFrame, Polarization};
use crate::error::{Error, Result};
use num_complex::Complex32;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

pub const MAGIC: [u8; 4] = *b"HLCF";
const HEADER_LEN: usize = 16;

pub fn write_frame<W: Write>(frame: &ClutterFrame, mut w: W) -> Result<()> {
    let mut header = [0u8; HEADER_LEN];
    header[..4].copy_from_slice(&MAGIC);
    header[4..8].copy_from_slice(&u32_field(frame.cells(), "cells")?.to_le_bytes());
    header[8..12].copy_from_slice(&u32_field(frame.pulses(), "pulses")?.to_le_bytes());
    header[12..].copy_from_slice(&frame.polarization.code().to_le_bytes());
    w.write_all(&header)?;
    let mut buf = Vec::with_capacity(frame.samples().len() * 8);
    for v in frame.samples() {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

fn u32_field(v: usize, name: &str) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::Format(format!("{name} = {v} does not fit the header")))
}

pub fn read_frame<R: Read>(mut r: R) -> Result<ClutterFrame> {
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header)
        .map_err(|e| Error::Format(format!("truncated header: {e}")))?;
    if header[..4] != MAGIC {
        return Err(Error::Format("bad magic, not a clutter frame".into()));
    }
    let word = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().unwrap());
    let (cells, pulses, flags) = (word(4) as usize, word(8) as usize, word(12));
    if cells == 0 || pulses == 0 {
        return Err(Error::Format(format!("empty frame {cells} x {pulses}")));
    }
    if flags & !0b11 != 0 {
        return Err(Error::Format(format!("unknown flag bits {flags:#x}")));
    }
    let polarization = Polarization::from_code(flags & 0b11).expect("two-bit code");
    let n = cells
        .checked_mul(pulses)
        .ok_or_else(|| Error::Format("frame size overflows".into()))?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != n * 8 {
        return Err(Error::Format(format!(
            "payload has {} bytes, header implies {}",
            bytes.len(),
            n * 8
        )));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| {
            Complex32::new(
                f32::from_le_bytes(c[..4].try_into().unwrap()),
                f32::from_le_bytes(c[4..].try_into().unwrap()),
            )
        })
        .collect();
    ClutterFrame::from_samples(cells, pulses, data, polarization)
}

pub fn save_frame(frame: &ClutterFrame, path: impl AsRef<Path>) -> Result<()> {
    write_frame(frame, BufWriter::new(File::create(path)?))
}

pub fn load_frame(path: impl AsRef<Path>) -> Result<ClutterFrame> {
    read_frame(BufReader::new(File::open(path)?))
}
