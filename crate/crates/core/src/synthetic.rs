//! Artificial test images: a uniform rectangle on a uniform background, and
//! a solid half next to a horizontal gradient.

use crate::error::{Error, Result};
use crate::image::{Channels, Coord, Image, Rgb};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SyntheticKind {
    SolidRect,
    #[default]
    SolidPlusGradient,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SyntheticSpec {
    pub kind: SyntheticKind,
    pub width: usize,
    pub height: usize,
    pub channels: Channels,
    /// Background of `SolidRect`.
    pub background: Rgb,
    /// Rectangle of `SolidRect`; left half of `SolidPlusGradient`.
    pub foreground: Rgb,
    pub gradient_start: Rgb,
    pub gradient_end: Rgb,
}

impl SyntheticSpec {
    pub fn new(kind: SyntheticKind, width: usize, height: usize) -> Self {
        SyntheticSpec {
            kind,
            width,
            height,
            channels: Channels::Gray,
            background: Rgb::gray(200),
            foreground: Rgb::gray(50),
            gradient_start: Rgb::gray(0),
            gradient_end: Rgb::gray(255),
        }
    }
}

fn lerp(a: u8, b: u8, t: f64) -> u8 {
    (a as f64 + t * (b as f64 - a as f64))
        .round()
        .clamp(0.0, 255.0) as u8
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Image> {
    if spec.width == 0 || spec.height == 0 {
        return Err(Error::invalid(
            "synthetic image dimensions must be positive",
        ));
    }
    let (w, h) = (spec.width, spec.height);
    let mut img = Image::filled(w, h, spec.channels, spec.background)?;
    match spec.kind {
        SyntheticKind::SolidRect => {
            // centered, half the size in each direction
            for y in h / 4..(3 * h) / 4 {
                for x in w / 4..(3 * w) / 4 {
                    img.set_pixel(Coord { x, y }, spec.foreground)?;
                }
            }
        }
        SyntheticKind::SolidPlusGradient => {
            let half = w / 2;
            let span = (w - half).saturating_sub(1).max(1) as f64;
            for y in 0..h {
                for x in 0..w {
                    let color = if x < half {
                        spec.foreground
                    } else {
                        let t = (x - half) as f64 / span;
                        let (s, e) = (spec.gradient_start, spec.gradient_end);
                        Rgb::new(lerp(s.r, e.r, t), lerp(s.g, e.g, t), lerp(s.b, e.b, t))
                    };
                    img.set_pixel(Coord { x, y }, color)?;
                }
            }
        }
    }
    Ok(img)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn rect_has_two_values() {
        let img =
            generate_synthetic(&SyntheticSpec::new(SyntheticKind::SolidRect, 64, 64)).unwrap();
        let values: BTreeSet<u8> = img.data().iter().copied().collect();
        assert_eq!(values, BTreeSet::from([50, 200]));
        assert_eq!(img.pixel(Coord::new(32, 32)), Rgb::gray(50));
        assert_eq!(img.pixel(Coord::new(0, 0)), Rgb::gray(200));
    }

    #[test]
    fn gradient_is_monotone() {
        let img = generate_synthetic(&SyntheticSpec::new(SyntheticKind::SolidPlusGradient, 64, 8))
            .unwrap();
        let row: Vec<u8> = (32..64).map(|x| img.pixel(Coord::new(x, 3)).r).collect();
        assert!(row.windows(2).all(|p| p[0] < p[1]));
        assert_eq!((row[0], row[31]), (0, 255));
        assert!((0..32).all(|x| img.pixel(Coord::new(x, 5)) == Rgb::gray(50)));
    }

    #[test]
    fn single_pixel() {
        let img = generate_synthetic(&SyntheticSpec::new(SyntheticKind::SolidRect, 1, 1)).unwrap();
        assert_eq!(img.data(), &[200]);
        assert!(generate_synthetic(&SyntheticSpec::new(SyntheticKind::SolidRect, 0, 1)).is_err());
    }
}
