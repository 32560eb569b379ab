//! Reproducible impulse noise driven by a 32-bit linear congruential
//! generator.
//!
//! One generator stream supplies both the damaged coordinates and the
//! replacement colors: [`inject`] first draws the mask exactly as
//! [`sample_damage`] does, then keeps drawing for the colors of the flagged
//! pixels in raster order.
//!
//! The low bits of a power-of-two-modulus LCG have short periods (bit `k`
//! repeats every `2^(k+1)` steps), so draws are mapped to ranges through
//! their high bits.

use crate::error::{Error, Result};
use crate::image::{Channels, Coord, Image, Rgb};
use crate::mask::DamageMask;

pub const DEFAULT_LCG_A: u32 = 1_664_525;
pub const DEFAULT_LCG_C: u32 = 1_013_904_223;

/// `(a * state + c) mod 2^32`.
#[inline]
pub fn lcg_next(state: u32, a: u32, c: u32) -> u32 {
    a.wrapping_mul(state).wrapping_add(c)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lcg {
    state: u32,
    a: u32,
    c: u32,
}

impl Lcg {
    pub fn new(seed: u32, a: u32, c: u32) -> Self {
        Lcg { state: seed, a, c }
    }

    pub fn state(&self) -> u32 {
        self.state
    }

    pub fn next_u32(&mut self) -> u32 {
        self.state = lcg_next(self.state, self.a, self.c);
        self.state
    }

    /// Uniform-ish value in `0..n` taken from the high bits of one draw.
    pub fn below(&mut self, n: usize) -> usize {
        ((self.next_u32() as u64 * n as u64) >> 32) as usize
    }

    /// The top byte of one draw.
    pub fn byte(&mut self) -> u8 {
        (self.next_u32() >> 24) as u8
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum NoiseMode {
    /// Each channel of a damaged pixel is replaced by an independent draw.
    #[default]
    RandomValue,
    /// A damaged pixel becomes black or white.
    SaltPepper,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    /// Fraction of damaged pixels, in `[0, 1]`.
    pub p: f64,
    pub mode: NoiseMode,
    pub seed: u32,
    pub lcg_a: u32,
    pub lcg_c: u32,
}

impl NoiseSpec {
    pub fn new(p: f64, mode: NoiseMode, seed: u32) -> Result<Self> {
        let spec = NoiseSpec {
            p,
            mode,
            seed,
            lcg_a: DEFAULT_LCG_A,
            lcg_c: DEFAULT_LCG_C,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if (0.0..=1.0).contains(&self.p) {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "noise fraction must lie in [0, 1], got {}",
                self.p
            )))
        }
    }

    pub fn generator(&self) -> Lcg {
        Lcg::new(self.seed, self.lcg_a, self.lcg_c)
    }
}

/// `floor(p * pixels)`, tolerant of the representation error in decimal
/// fractions such as 0.29 * 100.
pub fn damage_quota(p: f64, pixels: usize) -> usize {
    let exact = p * pixels as f64;
    ((exact + exact.abs() * 1e-12).floor() as usize).min(pixels)
}

/// Damage mask drawn from a fresh generator seeded by `spec`.
pub fn sample_damage(spec: &NoiseSpec, width: usize, height: usize) -> Result<DamageMask> {
    spec.validate()?;
    Ok(sample_damage_with(
        &mut spec.generator(),
        spec.p,
        width,
        height,
    ))
}

fn sample_damage_with(rng: &mut Lcg, p: f64, width: usize, height: usize) -> DamageMask {
    let n = width * height;
    let quota = damage_quota(p, n);
    let mut mask = DamageMask::new(width, height);
    // Past this many draws, collisions are resolved by probing forward in
    // raster order so the loop always terminates.
    let patience = 32 * n + 1024;
    let mut placed = 0;
    let mut draws = 0;
    while placed < quota {
        let c = Coord {
            x: rng.below(width),
            y: rng.below(height),
        };
        draws += 1;
        if !mask.get(c) {
            mask.set(c, true);
            placed += 1;
        } else if draws > patience {
            let start = c.y * width + c.x;
            let free = (1..n)
                .map(|k| (start + k) % n)
                .find(|&i| !mask.flags()[i])
                .expect("quota never exceeds the pixel count");
            mask.set(
                Coord {
                    x: free % width,
                    y: free / width,
                },
                true,
            );
            placed += 1;
        }
    }
    mask
}

/// Corrupts `image` according to `spec`, returning the noisy image and the
/// ground-truth mask.
pub fn inject(image: &Image, spec: &NoiseSpec) -> Result<(Image, DamageMask)> {
    spec.validate()?;
    let mut rng = spec.generator();
    let mask = sample_damage_with(&mut rng, spec.p, image.width(), image.height());
    let mut out = image.clone();
    for c in mask.flagged() {
        let color = match (spec.mode, image.channels()) {
            (NoiseMode::RandomValue, Channels::Gray) => Rgb::gray(rng.byte()),
            (NoiseMode::RandomValue, Channels::Rgb) => {
                let r = rng.byte();
                let g = rng.byte();
                let b = rng.byte();
                Rgb::new(r, g, b)
            }
            (NoiseMode::SaltPepper, _) => {
                if rng.next_u32() >> 31 == 1 {
                    Rgb::gray(255)
                } else {
                    Rgb::gray(0)
                }
            }
        };
        out.set_pixel(c, color)?;
    }
    Ok((out, mask))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lcg_step() {
        // (1664525 * 42 + 1013904223) mod 2^32, evaluated with big integers
        assert_eq!(lcg_next(42, DEFAULT_LCG_A, DEFAULT_LCG_C), 1_083_814_273);
        assert_eq!(lcg_next(12345, 1, 0), 12345);
        let mut a = Lcg::new(7, DEFAULT_LCG_A, DEFAULT_LCG_C);
        let mut b = a.clone();
        assert!((0..100).all(|_| a.next_u32() == b.next_u32()));
    }

    #[test]
    fn quota_is_floor() {
        assert_eq!(damage_quota(0.2, 10_000), 2000);
        assert_eq!(damage_quota(0.07, 100), 7);
        assert_eq!(damage_quota(0.29, 100), 29);
        assert_eq!(damage_quota(0.5, 3), 1);
        assert_eq!(damage_quota(1.0, 17), 17);
        assert_eq!(damage_quota(0.0, 17), 0);
    }

    #[test]
    fn mask_cardinality() {
        for (w, h, p) in [
            (100, 100, 0.2),
            (64, 64, 0.5),
            (10, 10, 0.07),
            (8, 8, 1.0),
            (5, 3, 0.0),
        ] {
            let spec = NoiseSpec::new(p, NoiseMode::RandomValue, 3).unwrap();
            let m = sample_damage(&spec, w, h).unwrap();
            assert_eq!(m.count(), damage_quota(p, w * h));
            assert_eq!(m, sample_damage(&spec, w, h).unwrap());
        }
    }

    #[test]
    fn rejects_bad_fraction() {
        assert!(NoiseSpec::new(1.5, NoiseMode::RandomValue, 0).is_err());
        assert!(NoiseSpec::new(-0.1, NoiseMode::RandomValue, 0).is_err());
    }

    #[test]
    fn injection_touches_only_flagged_pixels() {
        let img = Image::filled(20, 20, Channels::Gray, Rgb::gray(128)).unwrap();
        let spec = NoiseSpec::new(0.1, NoiseMode::RandomValue, 99).unwrap();
        let (noisy, mask) = inject(&img, &spec).unwrap();
        assert_eq!(mask.count(), 40);
        for y in 0..20 {
            for x in 0..20 {
                let c = Coord::new(x, y);
                if !mask.get(c) {
                    assert_eq!(noisy.pixel(c), Rgb::gray(128));
                }
            }
        }
        assert_eq!(inject(&img, &spec).unwrap(), (noisy, mask));
    }

    #[test]
    fn zero_noise_is_identity() {
        let img = Image::filled(4, 4, Channels::Rgb, Rgb::new(1, 2, 3)).unwrap();
        let (noisy, mask) = inject(
            &img,
            &NoiseSpec::new(0.0, NoiseMode::SaltPepper, 1).unwrap(),
        )
        .unwrap();
        assert_eq!(noisy, img);
        assert!(mask.is_clear());
    }

    #[test]
    fn salt_and_pepper_extremes() {
        let img = Image::filled(16, 16, Channels::Rgb, Rgb::new(10, 100, 200)).unwrap();
        let (noisy, _) = inject(
            &img,
            &NoiseSpec::new(1.0, NoiseMode::SaltPepper, 5).unwrap(),
        )
        .unwrap();
        let mut seen = [false; 2];
        for px in noisy.data().chunks(3) {
            assert!(px == [0, 0, 0] || px == [255, 255, 255]);
            seen[(px[0] == 255) as usize] = true;
        }
        assert_eq!(seen, [true, true]);
    }
}
