//! Minimal binary PGM (P5) codec: 8-bit and 16-bit big-endian samples.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PgmError {
    BadMagic,
    Truncated,
    BadHeader(&'static str),
    UnsupportedMaxval(u32),
}

impl fmt::Display for PgmError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PgmError::BadMagic => write!(f, "not a binary PGM (expected P5)"),
            PgmError::Truncated => write!(f, "pixel data truncated"),
            PgmError::BadHeader(what) => write!(f, "malformed header: {what}"),
            PgmError::UnsupportedMaxval(m) => {
                write!(f, "unsupported maxval {m} (expected 255 or 65535)")
            }
        }
    }
}

impl std::error::Error for PgmError {}

/// Decoded grayscale raster, samples normalized to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PgmImage {
    pub width: usize,
    pub height: usize,
    pub maxval: u32,
    pub luminance: Vec<f64>,
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Header<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b' ' | b'\t' | b'\n' | b'\r' | 0x0b | 0x0c => self.pos += 1,
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &'static str) -> Result<u32, PgmError> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(PgmError::BadHeader(what));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or(PgmError::BadHeader(what))
    }
}

pub fn decode(bytes: &[u8]) -> Result<PgmImage, PgmError> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(PgmError::BadMagic);
    }
    let mut hdr = Header { bytes, pos: 2 };
    let width = hdr.number("width")? as usize;
    let height = hdr.number("height")? as usize;
    let maxval = hdr.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(PgmError::BadHeader("zero dimension"));
    }
    // exactly one whitespace byte separates maxval from the raster
    match bytes.get(hdr.pos) {
        Some(c) if c.is_ascii_whitespace() => hdr.pos += 1,
        _ => return Err(PgmError::BadHeader("missing separator before raster")),
    }
    let bytes_per_sample = match maxval {
        255 => 1,
        65535 => 2,
        other => return Err(PgmError::UnsupportedMaxval(other)),
    };
    let count = width
        .checked_mul(height)
        .ok_or(PgmError::BadHeader("dimensions overflow"))?;
    let raster = &bytes[hdr.pos..];
    if raster.len() < count * bytes_per_sample {
        return Err(PgmError::Truncated);
    }
    let scale = maxval as f64;
    let luminance = if bytes_per_sample == 1 {
        raster[..count].iter().map(|&g| g as f64 / scale).collect()
    } else {
        raster[..count * 2]
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64 / scale)
            .collect()
    };
    Ok(PgmImage {
        width,
        height,
        maxval,
        luminance,
    })
}

/// Encodes luminance in `[0, 1]` as an 8-bit P5 file (rounded to nearest).
pub fn encode_8bit(width: usize, height: usize, luminance: &[f64]) -> Vec<u8> {
    assert_eq!(luminance.len(), width * height);
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend(luminance.iter().map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8));
    out
}

pub fn encode_16bit(width: usize, height: usize, luminance: &[f64]) -> Vec<u8> {
    assert_eq!(luminance.len(), width * height);
    let mut out = format!("P5\n{width} {height}\n65535\n").into_bytes();
    for &v in luminance {
        let g = (v.clamp(0.0, 1.0) * 65535.0).round() as u16;
        out.extend_from_slice(&g.to_be_bytes());
    }
    out
}
