//! 8-bit PGM (P2 ASCII / P5 binary) decoding and encoding.
//!
//! Files store rows top to bottom; [`ImageGrid`] stores them bottom to top,
//! so the decoder flips the row order and the encoder flips it back.

use crate::error::{Error, Result};
use crate::grid::ImageGrid;

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    /// Skips whitespace and `#` comments (which run to end of line).
    fn skip_separators(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn next_token(&mut self) -> Result<&'a str> {
        self.skip_separators();
        let start = self.pos;
        while self.pos < self.bytes.len()
            && !self.bytes[self.pos].is_ascii_whitespace()
            && self.bytes[self.pos] != b'#'
        {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(Error::MalformedHeader("unexpected end of stream".into()));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .map_err(|_| Error::MalformedHeader("non-ASCII token".into()))
    }

    fn next_int(&mut self, what: &str) -> Result<i64> {
        let token = self.next_token()?;
        token
            .parse::<i64>()
            .map_err(|_| Error::MalformedHeader(format!("{what}: not an integer: {token:?}")))
    }
}

/// Decodes a P2 or P5 grey-scale PGM stream into an [`ImageGrid`].
///
/// Samples are normalized as `raw / maxval`; the first row of the file
/// becomes the top row of the grid (`j = H - 1`).
pub fn read_pgm(bytes: &[u8]) -> Result<ImageGrid> {
    let mut cur = Cursor::new(bytes);
    let magic = cur.next_token()?;
    let binary = match magic {
        "P2" => false,
        "P5" => true,
        other => return Err(Error::BadMagic(other.chars().take(8).collect())),
    };

    let width = cur.next_int("width")?;
    let height = cur.next_int("height")?;
    if width <= 0 || height <= 0 {
        return Err(Error::BadDimensions { width, height });
    }
    let maxval = cur.next_int("maxval")?;
    if !(1..=255).contains(&maxval) {
        return Err(Error::BadMaxval(maxval));
    }

    let (w, h) = (width as usize, height as usize);
    let count = w * h;
    let mut raw = Vec::with_capacity(count);
    if binary {
        // A single whitespace byte separates the header from the payload.
        match bytes.get(cur.pos) {
            Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
            _ => {
                return Err(Error::MalformedHeader(
                    "missing whitespace before binary payload".into(),
                ))
            }
        }
        let payload = &bytes[cur.pos..];
        if payload.len() < count {
            return Err(Error::Truncated {
                expected: count,
                got: payload.len(),
            });
        }
        raw.extend(payload[..count].iter().map(|&b| b as i64));
    } else {
        for got in 0..count {
            cur.skip_separators();
            if cur.pos >= bytes.len() {
                return Err(Error::Truncated {
                    expected: count,
                    got,
                });
            }
            raw.push(cur.next_int("sample")?);
        }
    }

    let mut values = vec![0.0; count];
    for (file_row, chunk) in raw.chunks(w).enumerate() {
        let grid_row = h - 1 - file_row;
        for (i, &sample) in chunk.iter().enumerate() {
            if sample < 0 || sample > maxval {
                return Err(Error::SampleOutOfRange {
                    value: sample,
                    maxval,
                });
            }
            values[grid_row * w + i] = sample as f64 / maxval as f64;
        }
    }
    ImageGrid::new(w, h, values)
}

/// Encodes an image as a binary P5 stream with maxval 255.
///
/// Values are quantized as `round(255 * v)`; a decode of the result agrees
/// with the input to within `1/510` per pixel.
pub fn write_pgm(img: &ImageGrid) -> Vec<u8> {
    let (w, h) = (img.width(), img.height());
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    out.reserve(w * h);
    for file_row in 0..h {
        let grid_row = h - 1 - file_row;
        for i in 0..w {
            let byte = (255.0 * img.get(i, grid_row)).round().clamp(0.0, 255.0) as u8;
            out.push(byte);
        }
    }
    out
}
