//! Raster images and the binary PNM (P5/P6, maxval 255) codec.
//!
//! Images are 8-bit, row-major, with one (gray) or three (RGB) channels.
//! Grayscale pixels are exposed through [`Image::get_pixel`] as replicated
//! RGB triples so color-distance code never has to special-case them.

use crate::error::{Error, Result};

/// Pixel coordinate; `x` indexes columns, `y` indexes rows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coord {
    pub x: usize,
    pub y: usize,
}

impl Coord {
    pub const fn new(x: usize, y: usize) -> Self {
        Coord { x, y }
    }
}

impl From<(usize, usize)> for Coord {
    fn from((x, y): (usize, usize)) -> Self {
        Coord { x, y }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Rgb {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl Rgb {
    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Rgb { r, g, b }
    }

    pub const fn gray(v: u8) -> Self {
        Rgb { r: v, g: v, b: v }
    }

    pub fn channel(self, c: usize) -> u8 {
        match c {
            0 => self.r,
            1 => self.g,
            2 => self.b,
            _ => panic!("channel index {c} out of range"),
        }
    }

    pub fn with_channel(mut self, c: usize, v: u8) -> Self {
        match c {
            0 => self.r = v,
            1 => self.g = v,
            2 => self.b = v,
            _ => panic!("channel index {c} out of range"),
        }
        self
    }
}

/// Channel layout of an [`Image`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Channels {
    Gray = 1,
    Rgb = 3,
}

impl Channels {
    pub fn count(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    width: usize,
    height: usize,
    channels: Channels,
    data: Vec<u8>,
}

impl Image {
    pub const MAXVAL: u8 = 255;

    /// Wraps a row-major buffer. Fails if the length disagrees with the
    /// dimensions or if either dimension is zero.
    pub fn from_raw(
        width: usize,
        height: usize,
        channels: Channels,
        data: Vec<u8>,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        let expected = width * height * channels.count();
        if data.len() != expected {
            return Err(Error::Length {
                expected,
                found: data.len(),
            });
        }
        Ok(Image {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, channels: Channels, color: Rgb) -> Result<Self> {
        let data = match channels {
            Channels::Gray => vec![color.r; width * height],
            Channels::Rgb => std::iter::repeat_n([color.r, color.g, color.b], width * height)
                .flatten()
                .collect(),
        };
        Image::from_raw(width, height, channels, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> Channels {
        self.channels
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_raw(self) -> Vec<u8> {
        self.data
    }

    pub fn same_shape(&self, other: &Image) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }

    pub fn contains(&self, c: Coord) -> bool {
        c.x < self.width && c.y < self.height
    }

    fn check(&self, c: Coord) -> Result<()> {
        if self.contains(c) {
            Ok(())
        } else {
            Err(Error::OutOfBounds {
                x: c.x,
                y: c.y,
                width: self.width,
                height: self.height,
            })
        }
    }

    /// Color of the pixel at `c`; grayscale values are replicated into all
    /// three components.
    pub fn get_pixel(&self, c: Coord) -> Result<Rgb> {
        self.check(c)?;
        Ok(self.pixel(c))
    }

    /// Unchecked variant of [`Image::get_pixel`] for hot loops. Panics on
    /// out-of-range coordinates.
    #[inline]
    pub fn pixel(&self, c: Coord) -> Rgb {
        self.pixel_at(c.y * self.width + c.x)
    }

    #[inline]
    pub(crate) fn pixel_at(&self, idx: usize) -> Rgb {
        match self.channels {
            Channels::Gray => Rgb::gray(self.data[idx]),
            Channels::Rgb => {
                let o = idx * 3;
                Rgb::new(self.data[o], self.data[o + 1], self.data[o + 2])
            }
        }
    }

    /// Overwrites the pixel at `c`. For grayscale images only the red
    /// component is stored.
    pub fn set_pixel(&mut self, c: Coord, color: Rgb) -> Result<()> {
        self.check(c)?;
        self.set_pixel_at(c.y * self.width + c.x, color);
        Ok(())
    }

    #[inline]
    pub(crate) fn set_pixel_at(&mut self, idx: usize, color: Rgb) {
        match self.channels {
            Channels::Gray => self.data[idx] = color.r,
            Channels::Rgb => {
                let o = idx * 3;
                self.data[o] = color.r;
                self.data[o + 1] = color.g;
                self.data[o + 2] = color.b;
            }
        }
    }

    /// Copies the `w`x`h` block whose top-left corner is `origin`.
    pub fn crop(&self, origin: Coord, w: usize, h: usize) -> Result<Image> {
        if w == 0 || h == 0 {
            return Err(Error::invalid("crop dimensions must be positive"));
        }
        self.check(origin)?;
        self.check(Coord::new(origin.x + w - 1, origin.y + h - 1))?;
        let ch = self.channels.count();
        let mut data = Vec::with_capacity(w * h * ch);
        for y in origin.y..origin.y + h {
            let start = (y * self.width + origin.x) * ch;
            data.extend_from_slice(&self.data[start..start + w * ch]);
        }
        Image::from_raw(w, h, self.channels, data)
    }

    /// Decodes a binary PNM stream (P5 or P6, maxval 255).
    pub fn load_pnm(bytes: &[u8]) -> Result<Image> {
        let mut r = HeaderReader { bytes, pos: 0 };
        let magic = r.token()?;
        let channels = match magic.as_slice() {
            b"P5" => Channels::Gray,
            b"P6" => Channels::Rgb,
            b"P1" | b"P2" | b"P3" | b"P4" | b"P7" => {
                return Err(Error::UnsupportedFormat(format!(
                    "PNM variant {} (only P5 and P6 are supported)",
                    String::from_utf8_lossy(&magic)
                )))
            }
            _ => {
                return Err(Error::Parse {
                    offset: 0,
                    message: "missing P5/P6 magic number".into(),
                })
            }
        };
        let width = r.number()?;
        let height = r.number()?;
        let maxval_offset = r.pos;
        let maxval = r.number()?;
        if maxval != 255 {
            return Err(Error::UnsupportedFormat(format!(
                "maxval {maxval} at byte {maxval_offset} (only 255 is supported)"
            )));
        }
        // Exactly one whitespace byte separates the header from the raster.
        match r.bytes.get(r.pos) {
            Some(b) if b.is_ascii_whitespace() => r.pos += 1,
            _ => {
                return Err(Error::Parse {
                    offset: r.pos,
                    message: "expected a single whitespace byte after maxval".into(),
                })
            }
        }
        if width == 0 || height == 0 {
            return Err(Error::Parse {
                offset: r.pos,
                message: format!("zero image dimension {width}x{height}"),
            });
        }
        let expected = width
            .checked_mul(height)
            .and_then(|n| n.checked_mul(channels.count()))
            .ok_or_else(|| Error::Parse {
                offset: r.pos,
                message: "image dimensions overflow".into(),
            })?;
        let payload = &bytes[r.pos..];
        if payload.len() != expected {
            return Err(Error::Length {
                expected,
                found: payload.len(),
            });
        }
        Image::from_raw(width, height, channels, payload.to_vec())
    }

    /// Encodes with the canonical header `P5\n{w} {h}\n255\n` (or `P6`).
    pub fn save_pnm(&self) -> Vec<u8> {
        let magic = match self.channels {
            Channels::Gray => "P5",
            Channels::Rgb => "P6",
        };
        let header = format!("{magic}\n{} {}\n255\n", self.width, self.height);
        let mut out = Vec::with_capacity(header.len() + self.data.len());
        out.extend_from_slice(header.as_bytes());
        out.extend_from_slice(&self.data);
        out
    }

    pub fn read_pnm_file(path: impl AsRef<std::path::Path>) -> Result<Image> {
        Image::load_pnm(&std::fs::read(path)?)
    }

    pub fn write_pnm_file(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, self.save_pnm())?;
        Ok(())
    }
}

struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderReader<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' {
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

    fn token(&mut self) -> Result<Vec<u8>> {
        self.skip_space_and_comments();
        let start = self.pos;
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() || b == b'#' {
                break;
            }
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Parse {
                offset: start,
                message: "unexpected end of header".into(),
            });
        }
        Ok(self.bytes[start..self.pos].to_vec())
    }

    fn number(&mut self) -> Result<usize> {
        let tok = self.token()?;
        let start = self.pos - tok.len();
        std::str::from_utf8(&tok)
            .ok()
            .filter(|s| s.bytes().all(|b| b.is_ascii_digit()))
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Parse {
                offset: start,
                message: format!(
                    "expected a decimal number, found {:?}",
                    String::from_utf8_lossy(&tok)
                ),
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_gray() {
        let mut bytes = b"P5\n2 1\n255\n".to_vec();
        bytes.extend([0x00, 0xFF]);
        let img = Image::load_pnm(&bytes).unwrap();
        assert_eq!((img.width(), img.height()), (2, 1));
        assert_eq!(img.channels(), Channels::Gray);
        assert_eq!(img.data(), &[0, 255]);
    }

    #[test]
    fn loads_color() {
        let mut bytes = b"P6\n1 1\n255\n".to_vec();
        bytes.extend([10, 20, 30]);
        let img = Image::load_pnm(&bytes).unwrap();
        assert_eq!(img.channels(), Channels::Rgb);
        assert_eq!(img.data(), &[10, 20, 30]);
    }

    #[test]
    fn rejects_16bit() {
        let mut bytes = b"P5\n2 2\n65535\n".to_vec();
        bytes.extend([0u8; 8]);
        assert!(matches!(
            Image::load_pnm(&bytes),
            Err(Error::UnsupportedFormat(_))
        ));
    }

    #[test]
    fn header_comments_are_skipped() {
        let mut bytes = b"P5 # gray\n# full line\n2\t1 # trailing\n255\n".to_vec();
        bytes.extend([3, 4]);
        assert_eq!(Image::load_pnm(&bytes).unwrap().data(), &[3, 4]);
    }

    #[test]
    fn truncated_payload_is_a_length_error() {
        let mut bytes = b"P6\n2 2\n255\n".to_vec();
        bytes.extend([0u8; 11]);
        assert!(matches!(
            Image::load_pnm(&bytes),
            Err(Error::Length {
                expected: 12,
                found: 11
            })
        ));
    }

    #[test]
    fn malformed_header_reports_offset() {
        match Image::load_pnm(b"P5\n2 x\n255\n") {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 5),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            Image::load_pnm(b"GIF89a"),
            Err(Error::Parse { offset: 0, .. })
        ));
        assert!(matches!(
            Image::load_pnm(b"P3\n1 1\n255\n0 0 0"),
            Err(Error::UnsupportedFormat(_))
        ));
    }

    #[test]
    fn saves_canonical_header() {
        let img = Image::from_raw(1, 1, Channels::Gray, vec![7]).unwrap();
        assert_eq!(img.save_pnm(), b"P5\n1 1\n255\n\x07".to_vec());
        let color = Image::filled(2, 2, Channels::Rgb, Rgb::new(1, 2, 3)).unwrap();
        let bytes = color.save_pnm();
        assert_eq!(&bytes[..11], b"P6\n2 2\n255\n");
        assert_eq!(bytes.len() - 11, 12);
    }

    #[test]
    fn get_pixel_replicates_gray() {
        let img = Image::filled(2, 2, Channels::Gray, Rgb::gray(128)).unwrap();
        assert_eq!(
            img.get_pixel(Coord::new(0, 0)).unwrap(),
            Rgb::new(128, 128, 128)
        );
        let color = Image::from_raw(1, 1, Channels::Rgb, vec![10, 20, 30]).unwrap();
        assert_eq!(
            color.get_pixel(Coord::new(0, 0)).unwrap(),
            Rgb::new(10, 20, 30)
        );
        assert!(matches!(
            img.get_pixel(Coord::new(2, 0)),
            Err(Error::OutOfBounds { .. })
        ));
    }

    #[test]
    fn crop_copies_block() {
        let img = Image::from_raw(3, 2, Channels::Gray, vec![0, 1, 2, 3, 4, 5]).unwrap();
        let c = img.crop(Coord::new(1, 0), 2, 2).unwrap();
        assert_eq!(c.data(), &[1, 2, 4, 5]);
        assert!(img.crop(Coord::new(2, 0), 2, 1).is_err());
    }
}
