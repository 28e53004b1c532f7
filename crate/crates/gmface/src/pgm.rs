//! Netpbm graymaps: P2 (ASCII) and P5 (binary), maxval up to 65535.
//!
//! Samples are normalized to `[0, 1]` by `value / maxval` on read. Writes
//! always emit P5, clamping to `[0, 1]` and quantizing with
//! `round(value · maxval)`. 16-bit samples are big-endian.

use std::fs;
use std::path::Path;

use gmface_core::ImageGrid;

use crate::error::{Error, Result};

pub fn read_image(path: impl AsRef<Path>) -> Result<ImageGrid> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes).map_err(|e| Error::in_file(path, e))
}

pub fn write_image(grid: &ImageGrid, path: impl AsRef<Path>, maxval: u16) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode(grid, maxval)).map_err(|e| Error::io(path, e))
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Pgm {
            offset: self.pos,
            message: message.into(),
        })
    }

    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.buf.get(self.pos) {
            if b == b'#' {
                while let Some(&b) = self.buf.get(self.pos) {
                    self.pos += 1;
                    if b == b'\n' || b == b'\r' {
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

    fn number(&mut self, what: &str) -> Result<u32> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.buf.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            self.pos = start;
            return match self.buf.get(start) {
                None => self.err(format!("unexpected end of data reading {what}")),
                Some(_) => self.err(format!("expected a decimal {what}")),
            };
        }
        let text = std::str::from_utf8(&self.buf[start..self.pos]).expect("ascii digits");
        text.parse().or_else(|_| {
            self.pos = start;
            self.err(format!("{what} out of range"))
        })
    }
}

/// Parses a P2 or P5 image from memory.
pub fn decode(bytes: &[u8]) -> Result<ImageGrid> {
    let mut cur = Cursor { buf: bytes, pos: 0 };
    let binary = match bytes.get(..2) {
        Some(b"P5") => true,
        Some(b"P2") => false,
        Some(_) => return cur.err("unsupported magic, expected P2 or P5"),
        None => return cur.err("file too short for a PGM header"),
    };
    cur.pos = 2;
    let width = cur.number("width")? as usize;
    let height = cur.number("height")? as usize;
    if width == 0 || height == 0 {
        return cur.err(format!("zero image dimension {width}x{height}"));
    }
    let maxval = cur.number("maxval")?;
    if maxval == 0 || maxval > 65535 {
        return cur.err(format!("maxval {maxval} outside 1..=65535"));
    }
    let scale = 1.0 / maxval as f64;
    let count = width.checked_mul(height).ok_or_else(|| Error::Pgm {
        offset: cur.pos,
        message: "image dimensions overflow".into(),
    })?;
    let mut pixels = Vec::with_capacity(count);

    if binary {
        // exactly one whitespace byte separates the header from the raster
        match bytes.get(cur.pos) {
            Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
            Some(_) => return cur.err("expected whitespace after maxval"),
            None => return cur.err("missing raster data"),
        }
        let wide = maxval > 255;
        let sample_bytes = if wide { 2 } else { 1 };
        let needed = count * sample_bytes;
        let have = bytes.len() - cur.pos;
        if have < needed {
            cur.pos = bytes.len();
            return cur.err(format!(
                "truncated raster: need {needed} bytes, have {have}"
            ));
        }
        let raster = &bytes[cur.pos..cur.pos + needed];
        for (i, chunk) in raster.chunks_exact(sample_bytes).enumerate() {
            let v = if wide {
                u16::from_be_bytes([chunk[0], chunk[1]]) as u32
            } else {
                chunk[0] as u32
            };
            if v > maxval {
                cur.pos += i * sample_bytes;
                return cur.err(format!("sample {v} exceeds maxval {maxval}"));
            }
            pixels.push(v as f64 * scale);
        }
    } else {
        for _ in 0..count {
            cur.skip_space_and_comments();
            let start = cur.pos;
            let v = cur.number("sample")?;
            if v > maxval {
                cur.pos = start;
                return cur.err(format!("sample {v} exceeds maxval {maxval}"));
            }
            pixels.push(v as f64 * scale);
        }
    }
    Ok(ImageGrid::new(height, width, pixels)?)
}

/// Serializes `grid` as binary P5.
pub fn encode(grid: &ImageGrid, maxval: u16) -> Vec<u8> {
    let maxval = maxval.max(1);
    let mut out = format!("P5\n{} {}\n{}\n", grid.width(), grid.height(), maxval).into_bytes();
    let m = maxval as f64;
    for &v in grid.pixels() {
        // NaN maps to 0
        let q = (v.clamp(0.0, 1.0) * m).round() as u16;
        if maxval > 255 {
            out.extend_from_slice(&q.to_be_bytes());
        } else {
            out.push(q as u8);
        }
    }
    out
}
