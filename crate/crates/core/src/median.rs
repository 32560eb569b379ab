//! 3x3 per-channel median filter, the baseline the modularity filter is
//! compared against.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::Image;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Border {
    /// Out-of-bounds taps read the nearest edge pixel.
    #[default]
    Replicate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct MedianConfig {
    pub border: Border,
}

/// Middle element of an odd-length list. Reorders `values`.
pub fn window_median(values: &mut [u8]) -> Result<u8> {
    if values.len().is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "median window must have odd, non-zero length, got {}",
            values.len()
        )));
    }
    let mid = values.len() / 2;
    Ok(*values.select_nth_unstable(mid).1)
}

pub fn median_filter(image: &Image) -> Image {
    median_filter_with(image, MedianConfig::default())
}

pub fn median_filter_with(image: &Image, config: MedianConfig) -> Image {
    let Border::Replicate = config.border;
    let (w, h) = (image.width(), image.height());
    let ch = image.channels().count();
    let src = image.data();
    let mut out = vec![0u8; src.len()];
    out.par_chunks_mut(w * ch).enumerate().for_each(|(y, row)| {
        let rows = [y.saturating_sub(1), y, (y + 1).min(h - 1)];
        for x in 0..w {
            let cols = [x.saturating_sub(1), x, (x + 1).min(w - 1)];
            for c in 0..ch {
                let mut win = [0u8; 9];
                for (k, (&yy, &xx)) in rows
                    .iter()
                    .flat_map(|r| cols.iter().map(move |cc| (r, cc)))
                    .enumerate()
                {
                    win[k] = src[(yy * w + xx) * ch + c];
                }
                row[x * ch + c] = *win.select_nth_unstable(4).1;
            }
        }
    });
    Image::from_raw(w, h, image.channels(), out).expect("same shape as input")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::{Channels, Rgb};

    #[test]
    fn window_median_examples() {
        assert_eq!(window_median(&mut [1, 2, 3, 4, 5, 6, 7, 8, 9]).unwrap(), 5);
        assert_eq!(window_median(&mut [9, 1, 8, 2, 7, 3, 6, 4, 5]).unwrap(), 5);
        assert_eq!(window_median(&mut [7; 9]).unwrap(), 7);
        assert_eq!(
            window_median(&mut [255, 0, 0, 0, 0, 0, 0, 0, 255]).unwrap(),
            0
        );
        assert!(window_median(&mut []).is_err());
        assert!(window_median(&mut [1, 2]).is_err());
    }

    #[test]
    fn flat_is_fixed_point() {
        let img = Image::filled(5, 4, Channels::Rgb, Rgb::new(3, 4, 5)).unwrap();
        assert_eq!(median_filter(&img), img);
    }

    #[test]
    fn lone_outlier_is_removed() {
        let mut img = Image::filled(5, 5, Channels::Gray, Rgb::gray(0)).unwrap();
        img.set_pixel((2, 2).into(), Rgb::gray(255)).unwrap();
        assert!(median_filter(&img).data().iter().all(|&v| v == 0));
    }

    #[test]
    fn three_by_three_with_replication() {
        let img = Image::from_raw(3, 3, Channels::Gray, vec![0, 0, 0, 0, 255, 0, 0, 0, 0]).unwrap();
        // corner window after replication: 0,0,0 / 0,0,0 / 0,0,255 -> 0
        assert_eq!(median_filter(&img).data(), &[0; 9]);
    }
}
