use crate::error::{Error, Result};
use crate::image::{Channels, Coord, Image};

/// Per-pixel damage flags, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DamageMask {
    width: usize,
    height: usize,
    flags: Vec<bool>,
}

impl DamageMask {
    pub fn new(width: usize, height: usize) -> Self {
        DamageMask {
            width,
            height,
            flags: vec![false; width * height],
        }
    }

    pub fn from_flags(width: usize, height: usize, flags: Vec<bool>) -> Result<Self> {
        if flags.len() != width * height {
            return Err(Error::Length {
                expected: width * height,
                found: flags.len(),
            });
        }
        Ok(DamageMask {
            width,
            height,
            flags,
        })
    }

    pub fn for_image(image: &Image) -> Self {
        Self::new(image.width(), image.height())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn matches(&self, image: &Image) -> bool {
        self.width == image.width() && self.height == image.height()
    }

    pub fn get(&self, c: Coord) -> bool {
        self.flags[c.y * self.width + c.x]
    }

    pub fn set(&mut self, c: Coord, damaged: bool) {
        self.flags[c.y * self.width + c.x] = damaged;
    }

    pub fn count(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }

    pub fn is_clear(&self) -> bool {
        !self.flags.iter().any(|&f| f)
    }

    /// Flagged coordinates in raster order.
    pub fn flagged(&self) -> impl Iterator<Item = Coord> + '_ {
        let w = self.width;
        self.flags
            .iter()
            .enumerate()
            .filter(|(_, &f)| f)
            .map(move |(i, _)| Coord { x: i % w, y: i / w })
    }

    /// Grayscale rendering: 255 for damaged, 0 for clean.
    pub fn to_image(&self) -> Image {
        let data = self
            .flags
            .iter()
            .map(|&f| if f { 255 } else { 0 })
            .collect();
        Image::from_raw(self.width, self.height, Channels::Gray, data)
            .expect("mask dimensions are positive")
    }

    /// Inverse of [`DamageMask::to_image`]; any non-zero intensity counts as
    /// damaged.
    pub fn from_image(image: &Image) -> Self {
        let ch = image.channels().count();
        let flags = image
            .data()
            .chunks_exact(ch)
            .map(|px| px.iter().any(|&v| v != 0))
            .collect();
        DamageMask {
            width: image.width(),
            height: image.height(),
            flags,
        }
    }
}
