//! PBM (P1 plain / P4 raw) bitmap I/O.
//!
//! A PBM `1` bit maps to image pixel 1 and `0` to pixel 0.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::plane::BinaryImage;

/// Largest accepted pixel count.
const MAX_PIXELS: usize = 1 << 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PbmFormat {
    /// ASCII `P1`.
    Plain,
    /// Packed binary `P4`.
    Raw,
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            offset: self.pos,
            msg: msg.into(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.data.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek()?;
        self.pos += 1;
        if b == b'\n' {
            self.line += 1;
        }
        Some(b)
    }

    /// Skips whitespace and `#` comments.
    fn skip_space(&mut self) {
        while let Some(b) = self.peek() {
            if b == b'#' {
                while let Some(c) = self.bump() {
                    if c == b'\n' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space();
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.bump();
        }
        if start == self.pos {
            return Err(self.err(format!("expected {what}")));
        }
        let text = std::str::from_utf8(&self.data[start..self.pos]).expect("ascii digits");
        text.parse()
            .map_err(|_| self.err(format!("{what} '{text}' is too large")))
    }
}

/// Parses a P1 or P4 bitmap.
pub fn parse_pbm(data: &[u8]) -> Result<BinaryImage> {
    let mut cur = Cursor {
        data,
        pos: 0,
        line: 1,
    };
    let raw = match (cur.bump(), cur.bump()) {
        (Some(b'P'), Some(b'1')) => false,
        (Some(b'P'), Some(b'4')) => true,
        _ => return Err(Error::Parse { line: 1, offset: 0, msg: "missing P1/P4 magic number".into() }),
    };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    if width == 0 || height == 0 {
        return Err(cur.err(format!("degenerate dimensions {width}x{height}")));
    }
    let pixels = width
        .checked_mul(height)
        .filter(|&p| p <= MAX_PIXELS)
        .ok_or_else(|| cur.err(format!("dimensions {width}x{height} overflow")))?;

    let mut bits = Vec::with_capacity(pixels);
    if raw {
        match cur.bump() {
            Some(b) if b.is_ascii_whitespace() => {}
            _ => return Err(cur.err("expected single whitespace before raster")),
        }
        let stride = width.div_ceil(8);
        let need = stride * height;
        let raster = &data[cur.pos..];
        if raster.len() < need {
            return Err(cur.err(format!(
                "raster truncated: {} of {need} bytes present",
                raster.len()
            )));
        }
        for m in 0..height {
            let row = &raster[m * stride..(m + 1) * stride];
            for n in 0..width {
                bits.push((row[n / 8] >> (7 - n % 8)) & 1);
            }
        }
    } else {
        while bits.len() < pixels {
            cur.skip_space();
            match cur.bump() {
                Some(b'0') => bits.push(0),
                Some(b'1') => bits.push(1),
                Some(c) => {
                    return Err(Error::Parse {
                        line: cur.line,
                        offset: cur.pos - 1,
                        msg: format!("unexpected byte {:?} in raster", c as char),
                    })
                }
                None => {
                    return Err(cur.err(format!(
                        "raster truncated: {} of {pixels} pixels present",
                        bits.len()
                    )))
                }
            }
        }
    }
    BinaryImage::from_vec(height, width, bits)
}

pub fn load_pbm(path: impl AsRef<Path>) -> Result<BinaryImage> {
    parse_pbm(&std::fs::read(path)?)
}

pub fn write_pbm<W: Write>(image: &BinaryImage, format: PbmFormat, mut out: W) -> Result<()> {
    let (h, w) = image.shape();
    match format {
        PbmFormat::Raw => {
            write!(out, "P4\n{w} {h}\n")?;
            let stride = w.div_ceil(8);
            let mut row = vec![0u8; stride];
            for m in 0..h {
                row.iter_mut().for_each(|b| *b = 0);
                for n in 0..w {
                    row[n / 8] |= image.get(m, n) << (7 - n % 8);
                }
                out.write_all(&row)?;
            }
        }
        PbmFormat::Plain => {
            write!(out, "P1\n{w} {h}\n")?;
            for m in 0..h {
                let line: Vec<String> = image.row(m).iter().map(|b| b.to_string()).collect();
                writeln!(out, "{}", line.join(" "))?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// Writes a raw (P4) bitmap.
pub fn save_pbm(image: &BinaryImage, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_pbm(image, PbmFormat::Raw, std::io::BufWriter::new(file))
}
