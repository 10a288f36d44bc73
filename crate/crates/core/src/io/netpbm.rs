//! Netpbm graymap/pixmap codec (P2, P3, P5, P6).
//!
//! Binary rasters with `maxval > 255` use two big-endian bytes per sample.

use super::FormatError;
use crate::model::{RasterImage, SaliencyMap};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pnm {
    pub magic: &'static str,
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub maxval: u16,
    pub samples: Vec<u16>,
}

impl Pnm {
    pub fn to_raster<T: Scalar>(&self) -> Result<RasterImage<T>, FormatError> {
        let maxval = T::from_u16(self.maxval).unwrap();
        let pixels = self.samples.iter().map(|&s| T::from_u16(s).unwrap() / maxval).collect();
        Ok(RasterImage::new(self.width, self.height, self.channels, pixels)?)
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32, FormatError> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(FormatError::malformed(
                start,
                if start >= self.bytes.len() {
                    format!("unexpected end of data while reading {what}")
                } else {
                    format!("expected decimal {what}")
                },
            ));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| FormatError::malformed(start, format!("{what} out of range")))
    }
}

pub fn decode(bytes: &[u8]) -> Result<Pnm, FormatError> {
    let (magic, channels, ascii) = match bytes.get(..2) {
        Some(b"P2") => ("P2", 1, true),
        Some(b"P3") => ("P3", 3, true),
        Some(b"P5") => ("P5", 1, false),
        Some(b"P6") => ("P6", 3, false),
        _ => {
            return Err(FormatError::UnsupportedMagic(
                String::from_utf8_lossy(&bytes[..bytes.len().min(2)]).into_owned(),
            ))
        }
    };
    let mut cur = Cursor { bytes, pos: 2 };
    if !cur.bytes.get(2).is_some_and(|b| b.is_ascii_whitespace() || *b == b'#') {
        return Err(FormatError::malformed(2, "expected whitespace after magic"));
    }
    let width = cur.number("width")? as usize;
    let height = cur.number("height")? as usize;
    let maxval_at = cur.pos;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(FormatError::malformed(
            maxval_at,
            format!("zero dimension {width}x{height}"),
        ));
    }
    if maxval == 0 || maxval > u16::MAX as u32 {
        return Err(FormatError::malformed(
            maxval_at,
            format!("maxval {maxval} outside 1..=65535"),
        ));
    }
    let maxval = maxval as u16;
    let count = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| FormatError::malformed(maxval_at, "raster size overflows"))?;

    let mut samples = Vec::with_capacity(count.min(1 << 26));
    if ascii {
        for _ in 0..count {
            let at = cur.pos;
            let v = cur.number("sample")?;
            if v > maxval as u32 {
                return Err(FormatError::malformed(
                    at,
                    format!("sample {v} exceeds maxval {maxval}"),
                ));
            }
            samples.push(v as u16);
        }
    } else {
        // Exactly one whitespace byte separates the header from the raster.
        if !cur.bytes.get(cur.pos).is_some_and(u8::is_ascii_whitespace) {
            return Err(FormatError::malformed(
                cur.pos,
                "expected single whitespace before raster",
            ));
        }
        let start = cur.pos + 1;
        let width_bytes = if maxval > 255 { 2 } else { 1 };
        let needed = count * width_bytes;
        let raster = bytes.get(start..start + needed).ok_or_else(|| {
            FormatError::malformed(
                bytes.len(),
                format!(
                    "truncated raster: need {needed} bytes from offset {start}, have {}",
                    bytes.len() - start.min(bytes.len())
                ),
            )
        })?;
        for (i, chunk) in raster.chunks_exact(width_bytes).enumerate() {
            let v = if width_bytes == 2 {
                u16::from_be_bytes([chunk[0], chunk[1]])
            } else {
                chunk[0] as u16
            };
            if v > maxval {
                return Err(FormatError::malformed(
                    start + i * width_bytes,
                    format!("sample {v} exceeds maxval {maxval}"),
                ));
            }
            samples.push(v);
        }
    }
    Ok(Pnm {
        magic,
        width,
        height,
        channels,
        maxval,
        samples,
    })
}

/// Binary P5 (1 channel) or P6 (3 channels) with maxval 255.
pub fn encode_u8(width: usize, height: usize, channels: usize, samples: &[u8]) -> Vec<u8> {
    debug_assert_eq!(samples.len(), width * height * channels);
    let magic = if channels == 3 { "P6" } else { "P5" };
    let mut out = format!("{magic}\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(samples);
    out
}

/// Quantizes to a byte with round-half-up: `⌊v·255 + 0.5⌋`.
pub fn quantize<T: Scalar>(v: T) -> u8 {
    let scaled = (v * T::lit(255.0) + T::lit(0.5)).floor();
    scaled.max(T::zero()).min(T::lit(255.0)).to_u8().unwrap()
}

pub fn encode_map_pgm<T: Scalar>(map: &SaliencyMap<T>) -> Result<Vec<u8>, FormatError> {
    if !map.is_normalized() {
        return Err(FormatError::Unencodable(
            "8-bit graymap output requires a normalized map".into(),
        ));
    }
    let bytes: Vec<u8> = map.values().iter().map(|&v| quantize(v)).collect();
    Ok(encode_u8(map.width(), map.height(), 1, &bytes))
}
