//! File formats.
//!
//! * Images: binary PGM (`P5`), 8- or 16-bit, normalized to `[0, 1]` on load.
//! * Masks: binary PGM, maxval 255, `255` = sampled, `0` = unsampled, DC-centered.
//!   The fully sampled region, when known, travels in a `# fsr <h> <w>` header
//!   comment.
//! * Complex arrays (`CSI1`): magic `CSI1`, `u32` rows and cols (little-endian),
//!   then `rows * cols` interleaved `(re, im)` `f64` pairs, little-endian, row-major.
//!
//! Decoders take byte slices and never panic on malformed input.

use std::path::Path;

use crate::error::{Error, Result};
use crate::image::{ComplexImage, RealImage, C64};
use crate::sampling::SamplingMask;

pub const CSI_MAGIC: &[u8; 4] = b"CSI1";

/// Decoded PGM: raw samples plus header fields.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pgm {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub samples: Vec<u16>,
    /// Header comments, without the leading `#` and surrounding whitespace.
    pub comments: Vec<String>,
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    comments: Vec<String>,
}

impl<'a> HeaderCursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                let start = self.pos + 1;
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' && self.bytes[self.pos] != b'\r' {
                    self.pos += 1;
                }
                self.comments.push(String::from_utf8_lossy(&self.bytes[start..self.pos]).trim().to_string());
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u64> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::MalformedHeader(format!("expected {what}")));
        }
        let digits = std::str::from_utf8(&self.bytes[start..self.pos]).expect("ascii digits");
        digits.parse::<u64>().map_err(|_| Error::MalformedHeader(format!("{what} out of range")))
    }
}

/// Parses a binary PGM.
pub fn decode_pgm(bytes: &[u8]) -> Result<Pgm> {
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(Error::MalformedHeader("missing PGM magic".into()));
    }
    match bytes[1] {
        b'5' => {}
        b'1'..=b'7' => {
            return Err(Error::UnsupportedFormat(format!(
                "netpbm P{} (only binary P5 is supported)",
                bytes[1] as char
            )));
        }
        _ => return Err(Error::MalformedHeader("missing PGM magic".into())),
    }
    let mut cur = HeaderCursor { bytes, pos: 2, comments: Vec::new() };
    if cur.pos < bytes.len() && !bytes[cur.pos].is_ascii_whitespace() && bytes[cur.pos] != b'#' {
        return Err(Error::MalformedHeader("no separator after magic".into()));
    }
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::MalformedHeader(format!("empty image {width}x{height}")));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::UnsupportedFormat(format!("maxval {maxval} (allowed 1..=65535)")));
    }
    match bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        _ => return Err(Error::MalformedHeader("missing whitespace after maxval".into())),
    }
    let bytes_per_sample = if maxval < 256 { 1u64 } else { 2 };
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(bytes_per_sample))
        .filter(|&n| n <= isize::MAX as u64)
        .ok_or(Error::SizeOverflow { rows: height, cols: width })? as usize;
    let payload = &bytes[cur.pos..];
    if payload.len() < expected {
        return Err(Error::TruncatedPayload { expected, found: payload.len() });
    }
    if payload.len() > expected {
        return Err(Error::TrailingData(payload.len() - expected));
    }
    let samples: Vec<u16> = if bytes_per_sample == 1 {
        payload.iter().map(|&b| b as u16).collect()
    } else {
        payload.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect()
    };
    if let Some(i) = samples.iter().position(|&s| s as u64 > maxval) {
        return Err(Error::MalformedHeader(format!("sample {} at index {i} exceeds maxval {maxval}", samples[i])));
    }
    Ok(Pgm { width: width as usize, height: height as usize, maxval: maxval as u16, samples, comments: cur.comments })
}

/// Serializes a binary PGM (16-bit samples big-endian when `maxval > 255`).
pub fn encode_pgm(pgm: &Pgm) -> Vec<u8> {
    let mut out = b"P5\n".to_vec();
    for c in &pgm.comments {
        out.extend_from_slice(format!("# {c}\n").as_bytes());
    }
    out.extend_from_slice(format!("{} {}\n{}\n", pgm.width, pgm.height, pgm.maxval).as_bytes());
    if pgm.maxval < 256 {
        out.extend(pgm.samples.iter().map(|&s| s as u8));
    } else {
        for s in &pgm.samples {
            out.extend_from_slice(&s.to_be_bytes());
        }
    }
    out
}

/// Grayscale PGM as a real image in `[0, 1]` (sample / maxval).
pub fn decode_image(bytes: &[u8]) -> Result<ComplexImage> {
    let pgm = decode_pgm(bytes)?;
    let maxval = pgm.maxval as f64;
    let data = pgm.samples.iter().map(|&s| C64::new(s as f64 / maxval, 0.0)).collect();
    ComplexImage::new(pgm.height, pgm.width, data)
}

pub fn load_image(path: &Path) -> Result<ComplexImage> {
    decode_image(&std::fs::read(path)?)
}

/// 8-bit PGM of a real image, clamped to `[0, 1]` and rounded.
pub fn encode_image(image: &RealImage) -> Vec<u8> {
    let samples = image.as_slice().iter().map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u16).collect();
    encode_pgm(&Pgm { width: image.cols(), height: image.rows(), maxval: 255, samples, comments: Vec::new() })
}

pub fn save_image(path: &Path, image: &RealImage) -> Result<()> {
    Ok(std::fs::write(path, encode_image(image))?)
}

pub fn encode_complex(image: &ComplexImage) -> Result<Vec<u8>> {
    let rows = u32::try_from(image.rows())
        .map_err(|_| Error::SizeOverflow { rows: image.rows() as u64, cols: image.cols() as u64 })?;
    let cols = u32::try_from(image.cols())
        .map_err(|_| Error::SizeOverflow { rows: image.rows() as u64, cols: image.cols() as u64 })?;
    let mut out = Vec::with_capacity(12 + 16 * image.len());
    out.extend_from_slice(CSI_MAGIC);
    out.extend_from_slice(&rows.to_le_bytes());
    out.extend_from_slice(&cols.to_le_bytes());
    for v in image.as_slice() {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_complex(bytes: &[u8]) -> Result<ComplexImage> {
    if bytes.len() < 4 || &bytes[..4] != CSI_MAGIC {
        return Err(Error::BadMagic);
    }
    if bytes.len() < 12 {
        return Err(Error::MalformedHeader("CSI1 header shorter than 12 bytes".into()));
    }
    let rows = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes")) as u64;
    let cols = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as u64;
    if rows == 0 || cols == 0 {
        return Err(Error::MalformedHeader(format!("empty array {rows}x{cols}")));
    }
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(16))
        .filter(|&n| n <= isize::MAX as u64)
        .ok_or(Error::SizeOverflow { rows, cols })? as usize;
    let payload = &bytes[12..];
    if payload.len() < expected {
        return Err(Error::TruncatedPayload { expected, found: payload.len() });
    }
    if payload.len() > expected {
        return Err(Error::TrailingData(payload.len() - expected));
    }
    let data = payload
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            C64::new(re, im)
        })
        .collect();
    ComplexImage::new(rows as usize, cols as usize, data)
}

pub fn save_complex(path: &Path, image: &ComplexImage) -> Result<()> {
    Ok(std::fs::write(path, encode_complex(image)?)?)
}

pub fn load_complex(path: &Path) -> Result<ComplexImage> {
    decode_complex(&std::fs::read(path)?)
}

pub fn encode_mask(mask: &SamplingMask) -> Vec<u8> {
    let comments = mask.fsr_extent().map(|(h, w)| vec![format!("fsr {h} {w}")]).unwrap_or_default();
    let samples = mask.as_slice().iter().map(|&s| if s { 255 } else { 0 }).collect();
    encode_pgm(&Pgm { width: mask.cols(), height: mask.rows(), maxval: 255, samples, comments })
}

pub fn decode_mask(bytes: &[u8]) -> Result<SamplingMask> {
    let pgm = decode_pgm(bytes)?;
    if pgm.maxval != 255 {
        return Err(Error::UnsupportedFormat(format!("mask maxval {} (expected 255)", pgm.maxval)));
    }
    if let Some((index, &value)) = pgm.samples.iter().enumerate().find(|(_, &v)| v != 0 && v != 255) {
        return Err(Error::InvalidMaskValue { value, index });
    }
    let mut fsr = None;
    for c in &pgm.comments {
        let mut it = c.split_whitespace();
        if it.next() == Some("fsr") {
            let h = it.next().and_then(|v| v.parse().ok());
            let w = it.next().and_then(|v| v.parse().ok());
            match (h, w, it.next()) {
                (Some(h), Some(w), None) => fsr = Some((h, w)),
                _ => return Err(Error::MalformedHeader(format!("bad fsr comment {c:?}"))),
            }
        }
    }
    let sampled = pgm.samples.iter().map(|&v| v == 255).collect();
    SamplingMask::new(pgm.height, pgm.width, sampled, fsr)
}

pub fn save_mask(path: &Path, mask: &SamplingMask) -> Result<()> {
    Ok(std::fs::write(path, encode_mask(mask))?)
}

pub fn load_mask(path: &Path) -> Result<SamplingMask> {
    decode_mask(&std::fs::read(path)?)
}
