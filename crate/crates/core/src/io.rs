//! Netpbm grayscale (P5, with P6 collapsed to luma) and PFM float map I/O.
//!
//! PGM images load as intensities rescaled to `0..=255`. Masks are PGM
//! images thresholded at 128. PFM maps are written single-channel,
//! little-endian (scale `-1.0`), scanlines bottom to top as the format
//! prescribes.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::{BinaryMask, ScalarField};

/// Mask pixels with an 8-bit value at or above this are foreground.
pub const MASK_THRESHOLD: f64 = 128.0;

struct Header {
    magic: [u8; 2],
    width: usize,
    height: usize,
    third: String,
}

fn read_token<R: Read>(r: &mut R, fmt: &'static str) -> Result<String> {
    let mut token = Vec::new();
    let mut byte = [0u8; 1];
    loop {
        if r.read(&mut byte)? == 0 {
            if token.is_empty() {
                return Err(Error::format(fmt, "unexpected end of header"));
            }
            break;
        }
        let b = byte[0];
        if b == b'#' && token.is_empty() {
            // comment runs to end of line
            loop {
                if r.read(&mut byte)? == 0 || byte[0] == b'\n' || byte[0] == b'\r' {
                    break;
                }
            }
            continue;
        }
        if b.is_ascii_whitespace() {
            if token.is_empty() {
                continue;
            }
            // exactly one whitespace byte terminates the last header token
            break;
        }
        token.push(b);
        if token.len() > 64 {
            return Err(Error::format(fmt, "header token too long"));
        }
    }
    String::from_utf8(token).map_err(|_| Error::format(fmt, "non-ASCII header"))
}

fn read_header<R: Read>(r: &mut R, fmt: &'static str) -> Result<Header> {
    let magic_tok = read_token(r, fmt)?;
    let magic: [u8; 2] = magic_tok
        .as_bytes()
        .try_into()
        .map_err(|_| Error::format(fmt, format!("bad magic {magic_tok:?}")))?;
    let parse_dim = |s: String| -> Result<usize> {
        let v: usize = s.parse().map_err(|_| Error::format(fmt, format!("bad dimension {s:?}")))?;
        if v == 0 || v > 1 << 16 {
            return Err(Error::format(fmt, format!("dimension {v} out of range")));
        }
        Ok(v)
    };
    let width = parse_dim(read_token(r, fmt)?)?;
    let height = parse_dim(read_token(r, fmt)?)?;
    let third = read_token(r, fmt)?;
    Ok(Header {
        magic,
        width,
        height,
        third,
    })
}

/// Reads a binary PGM (P5) or PPM (P6, collapsed to luma) into a field with
/// values in `0..=255`.
pub fn read_pnm<R: Read>(mut r: R) -> Result<ScalarField> {
    const FMT: &str = "PGM";
    let header = read_header(&mut r, FMT)?;
    let channels = match &header.magic {
        b"P5" => 1,
        b"P6" => 3,
        other => {
            return Err(Error::format(
                FMT,
                format!("unsupported magic {:?}", String::from_utf8_lossy(other)),
            ))
        }
    };
    let maxval: u32 = header
        .third
        .parse()
        .map_err(|_| Error::format(FMT, format!("bad maxval {:?}", header.third)))?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::format(FMT, format!("maxval {maxval} out of range")));
    }
    let bytes_per_sample = if maxval > 255 { 2 } else { 1 };
    let n = header.width * header.height;
    let mut data = vec![0u8; n * channels * bytes_per_sample];
    r.read_exact(&mut data)
        .map_err(|_| Error::format(FMT, "truncated pixel data"))?;
    let scale = 255.0 / maxval as f64;
    let sample = |i: usize| -> f64 {
        let raw = if bytes_per_sample == 2 {
            u16::from_be_bytes([data[2 * i], data[2 * i + 1]]) as f64
        } else {
            data[i] as f64
        };
        raw.min(maxval as f64) * scale
    };
    let values = (0..n)
        .map(|p| {
            if channels == 1 {
                sample(p)
            } else {
                0.299 * sample(3 * p) + 0.587 * sample(3 * p + 1) + 0.114 * sample(3 * p + 2)
            }
        })
        .collect();
    ScalarField::new(header.width, header.height, values)
}

/// Reads a PGM/PPM mask; pixels at or above [`MASK_THRESHOLD`] are foreground.
pub fn read_mask<R: Read>(r: R) -> Result<BinaryMask> {
    Ok(BinaryMask::threshold(&read_pnm(r)?, MASK_THRESHOLD))
}

/// Writes an 8-bit P5 image, rounding and clamping values to `0..=255`.
pub fn write_pgm<W: Write>(mut w: W, field: &ScalarField) -> Result<()> {
    write!(w, "P5\n{} {}\n255\n", field.width(), field.height())?;
    let bytes: Vec<u8> = field
        .values()
        .iter()
        .map(|&x| x.round().clamp(0.0, 255.0) as u8)
        .collect();
    w.write_all(&bytes)?;
    w.flush()?;
    Ok(())
}

/// Writes a mask as P5 with foreground 255 and background 0.
pub fn write_mask<W: Write>(w: W, mask: &BinaryMask) -> Result<()> {
    write_pgm(w, &mask.to_field().map(|x| x * 255.0)?)
}

/// Reads a PFM map. `Pf` is read as-is, `PF` collapses to luma; either
/// byte order is accepted.
pub fn read_pfm<R: Read>(mut r: R) -> Result<ScalarField> {
    const FMT: &str = "PFM";
    let header = read_header(&mut r, FMT)?;
    let channels = match &header.magic {
        b"Pf" => 1,
        b"PF" => 3,
        other => {
            return Err(Error::format(
                FMT,
                format!("unsupported magic {:?}", String::from_utf8_lossy(other)),
            ))
        }
    };
    let scale: f64 = header
        .third
        .parse()
        .map_err(|_| Error::format(FMT, format!("bad scale {:?}", header.third)))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::format(FMT, "scale must be non-zero"));
    }
    let little = scale < 0.0;
    let (w, h) = (header.width, header.height);
    let mut data = vec![0u8; w * h * channels * 4];
    r.read_exact(&mut data)
        .map_err(|_| Error::format(FMT, "truncated float data"))?;
    let read = |i: usize| -> f64 {
        let b = [data[4 * i], data[4 * i + 1], data[4 * i + 2], data[4 * i + 3]];
        (if little { f32::from_le_bytes(b) } else { f32::from_be_bytes(b) }) as f64
    };
    let mut values = vec![0.0; w * h];
    for row in 0..h {
        // stored bottom row first
        let dst = h - 1 - row;
        for u in 0..w {
            let p = row * w + u;
            values[dst * w + u] = if channels == 1 {
                read(p)
            } else {
                0.299 * read(3 * p) + 0.587 * read(3 * p + 1) + 0.114 * read(3 * p + 2)
            };
        }
    }
    ScalarField::new(w, h, values)
}

/// Writes a single-channel little-endian PFM.
pub fn write_pfm<W: Write>(mut w: W, field: &ScalarField) -> Result<()> {
    let (width, height) = field.dims();
    write!(w, "Pf\n{width} {height}\n-1.0\n")?;
    let mut bytes = Vec::with_capacity(width * height * 4);
    for row in (0..height).rev() {
        for u in 0..width {
            bytes.extend_from_slice(&(field.get(u, row) as f32).to_le_bytes());
        }
    }
    w.write_all(&bytes)?;
    w.flush()?;
    Ok(())
}

pub fn load_image(path: impl AsRef<Path>) -> Result<ScalarField> {
    read_pnm(BufReader::new(File::open(path)?))
}

pub fn load_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    read_mask(BufReader::new(File::open(path)?))
}

pub fn load_pfm(path: impl AsRef<Path>) -> Result<ScalarField> {
    read_pfm(BufReader::new(File::open(path)?))
}

pub fn save_pfm(path: impl AsRef<Path>, field: &ScalarField) -> Result<()> {
    write_pfm(BufWriter::new(File::create(path)?), field)
}

pub fn save_mask(path: impl AsRef<Path>, mask: &BinaryMask) -> Result<()> {
    write_mask(BufWriter::new(File::create(path)?), mask)
}
