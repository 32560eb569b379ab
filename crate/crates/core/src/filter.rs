//! Impulse-noise detection and repair by modularity merge tests.
//!
//! Detection visits every pixel and evaluates the merge delta
//! `2 (e_ij - a_i a_j)` between the pixel and each of its king-move
//! neighbors. A pixel that would lower modularity by joining at least `k` of
//! its neighbors is treated as damaged. Repair scans candidate intensities
//! between the minimum and maximum of the donor neighbors and keeps the
//! candidate whose summed merge delta against them is largest.
//!
//! Both phases work on the 3x3 window graph around the pixel, mirrored at
//! the image border. In a clipped border window an isolated outlier gets one
//! negative delta on an edge and none in a corner. Two adjacent outliers can
//! mask each other, so [`denoise`] repeats detection after each repair.
//!
//! Under whole-image normalization `e_ij` is `O(1/m)` while `a_i a_j` is
//! `O(1/m^2)`, so every existing edge yields a positive delta and the sign
//! test never fires; [`Scope::Global`] is still available for small images.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{Channels, Coord, Image, Rgb};
use crate::lattice::{self, edge_weight, GraphConfig, LatticeWeights, WindowBorder};
use crate::mask::DamageMask;
use crate::modularity::merge_delta;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Scope {
    #[default]
    Window3x3,
    Global,
}

/// How per-neighbor deltas are combined into a damage decision.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Aggregation {
    /// At least `min(k_min_negative, neighbor count)` deltas below `-epsilon`.
    #[default]
    Count,
    /// Every delta below `-epsilon`.
    All,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilterConfig {
    pub graph: GraphConfig,
    pub scope: Scope,
    /// Completion of windows at the image border.
    pub border: WindowBorder,
    pub epsilon: f64,
    pub k_min_negative: usize,
    pub max_passes: usize,
    pub aggregation: Aggregation,
    pub scoring: Scoring,
    pub donors: Donors,
    /// Detect/repair rounds run by [`denoise`]; later rounds re-test the
    /// repaired image.
    pub rounds: usize,
}

/// How the merge deltas against the donor neighbors rank a candidate color.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Scoring {
    /// Largest single delta.
    Best,
    /// Sum of the deltas.
    #[default]
    Sum,
}

/// Which window cells take part in the candidate scan of a flagged pixel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Donors {
    /// Cells not flagged in the pending mask. A pixel whose neighbors are
    /// all still flagged is deferred to a later pass.
    Unflagged,
    /// Every cell at its current value; already repaired pixels contribute
    /// their repaired color.
    #[default]
    All,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            graph: GraphConfig::default(),
            scope: Scope::Window3x3,
            border: WindowBorder::Reflect,
            epsilon: 1e-12,
            k_min_negative: 4,
            max_passes: 8,
            aggregation: Aggregation::Count,
            scoring: Scoring::Sum,
            donors: Donors::All,
            rounds: 4,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<()> {
        self.graph.validate()?;
        if self.epsilon.is_nan() || self.epsilon < 0.0 {
            return Err(Error::invalid(format!(
                "epsilon must be non-negative, got {}",
                self.epsilon
            )));
        }
        if !(1..=8).contains(&self.k_min_negative) {
            return Err(Error::invalid(format!(
                "k_min_negative must lie in 1..=8, got {}",
                self.k_min_negative
            )));
        }
        if self.max_passes == 0 {
            return Err(Error::invalid("max_passes must be at least 1"));
        }
        if self.rounds == 0 {
            return Err(Error::invalid("rounds must be at least 1"));
        }
        Ok(())
    }

    fn is_damaged(&self, deltas: impl IntoIterator<Item = f64>) -> bool {
        let (mut total, mut negative) = (0usize, 0usize);
        for d in deltas {
            total += 1;
            if d < -self.epsilon {
                negative += 1;
            }
        }
        if total == 0 {
            return false;
        }
        match self.aggregation {
            Aggregation::Count => negative >= self.k_min_negative.min(total),
            Aggregation::All => negative == total,
        }
    }
}

/// Merge deltas between `p` and each other cell of its window (each
/// in-bounds neighbor under [`Scope::Global`]), in row-major order. Empty
/// when the graph has no weight at all.
///
/// This builds the dense [`ModularityMatrix`](crate::modularity::ModularityMatrix)
/// for the chosen scope on every call; [`detect`] uses a specialised kernel
/// instead.
pub fn pixel_deltas(image: &Image, p: Coord, config: &FilterConfig) -> Result<Vec<(Coord, f64)>> {
    config.validate()?;
    let neighbors = lattice::neighbors(p.x, p.y, image.width(), image.height())?;
    match config.scope {
        Scope::Window3x3 => {
            let (m, ctx) = match lattice::window_graph_with(image, p, config.graph, config.border) {
                Ok(v) => v,
                Err(Error::DegenerateGraph) => return Ok(Vec::new()),
                Err(e) => return Err(e),
            };
            (0..ctx.members.len())
                .filter(|&j| j != ctx.center_index)
                .map(|j| Ok((ctx.members[j], m.delta_q(ctx.center_index, j)?)))
                .collect()
        }
        Scope::Global => {
            let m = match lattice::global_graph(image, config.graph) {
                Ok(m) => m,
                Err(Error::DegenerateGraph) => return Ok(Vec::new()),
                Err(e) => return Err(e),
            };
            let w = image.width();
            neighbors
                .into_iter()
                .map(|q| Ok((q, m.delta_q(p.y * w + p.x, q.y * w + q.x)?)))
                .collect()
        }
    }
}

/// Runs the merge test at every pixel.
pub fn detect(image: &Image, config: &FilterConfig) -> Result<DamageMask> {
    config.validate()?;
    let (width, height) = (image.width(), image.height());
    let flags: Vec<bool> = match config.scope {
        Scope::Window3x3 => {
            let weights = LatticeWeights::new(image, config.graph);
            (0..height)
                .into_par_iter()
                .flat_map_iter(|y| {
                    let weights = &weights;
                    (0..width).map(move |x| {
                        let kernel = WindowKernel::new(
                            Coord { x, y },
                            weights.width(),
                            weights.height(),
                            config.border,
                            |a, b| weights.between(a, b),
                        );
                        let center = kernel.center_weights(|q| weights.between(Coord { x, y }, q));
                        kernel
                            .deltas(&center)
                            .is_some_and(|d| config.is_damaged(kernel.neighbor_values(&d)))
                    })
                })
                .collect()
        }
        Scope::Global => {
            let m = match lattice::global_graph(image, config.graph) {
                Ok(m) => m,
                Err(Error::DegenerateGraph) => return Ok(DamageMask::new(width, height)),
                Err(e) => return Err(e),
            };
            (0..width * height)
                .into_par_iter()
                .map(|i| {
                    let p = Coord {
                        x: i % width,
                        y: i / width,
                    };
                    let deltas = lattice::OFFSETS
                        .iter()
                        .filter_map(|&o| lattice::offset(p, o, width, height))
                        .map(|q| {
                            merge_delta(
                                m.e(i, q.y * width + q.x),
                                m.strength(i),
                                m.strength(q.y * width + q.x),
                            )
                        });
                    config.is_damaged(deltas)
                })
                .collect()
        }
    };
    DamageMask::from_flags(width, height, flags)
}

/// 3x3 window with the edges not touching the center already summed, so that merge deltas for a varying center color cost one pass
/// over the (at most eight) center edges.
pub(crate) struct WindowKernel {
    len: usize,
    center: usize,
    members: [Coord; 9],
    /// Raw strength of each member counting only edges that avoid the center.
    ring_strength: [f64; 9],
    /// Sum of `ring_strength`, i.e. both orientations of every ring edge.
    ring_total: f64,
}

impl WindowKernel {
    pub(crate) fn new(
        center: Coord,
        width: usize,
        height: usize,
        border: WindowBorder,
        weight: impl Fn(Coord, Coord) -> f64,
    ) -> Self {
        let mut members = [Coord { x: 0, y: 0 }; 9];
        let mut slots = [(0, 0); 9];
        let mut len = 0;
        let mut center_idx = 0;
        for (slot, c) in lattice::window_cells(center, width, height, border) {
            if slot == (0, 0) {
                center_idx = len;
            }
            members[len] = c;
            slots[len] = slot;
            len += 1;
        }
        let mut ring_strength = [0.0; 9];
        for i in 0..len {
            if i == center_idx {
                continue;
            }
            for j in i + 1..len {
                if j != center_idx && lattice::slots_adjacent(slots[i], slots[j]) {
                    let w = weight(members[i], members[j]);
                    ring_strength[i] += w;
                    ring_strength[j] += w;
                }
            }
        }
        let ring_total = ring_strength[..len].iter().sum();
        WindowKernel {
            len,
            center: center_idx,
            members,
            ring_strength,
            ring_total,
        }
    }

    pub(crate) fn members(&self) -> impl Iterator<Item = (usize, Coord)> + '_ {
        (0..self.len)
            .filter(move |&i| i != self.center)
            .map(move |i| (i, self.members[i]))
    }

    /// Center-edge weights indexed like the members; the center slot stays 0.
    pub(crate) fn center_weights(&self, weight: impl Fn(Coord) -> f64) -> [f64; 9] {
        let mut out = [0.0; 9];
        for (i, q) in self.members() {
            out[i] = weight(q);
        }
        out
    }

    /// Merge delta between the center and every other member, or `None`
    /// when the window carries no weight.
    pub(crate) fn deltas(&self, center_weights: &[f64; 9]) -> Option<[f64; 9]> {
        let center_strength: f64 = center_weights[..self.len].iter().sum();
        let total = self.ring_total + 2.0 * center_strength;
        if total <= 0.0 {
            return None;
        }
        let a_center = center_strength / total;
        let mut out = [0.0; 9];
        for (i, _) in self.members() {
            let a_i = (self.ring_strength[i] + center_weights[i]) / total;
            out[i] = merge_delta(center_weights[i] / total, a_center, a_i);
        }
        Some(out)
    }

    pub(crate) fn neighbor_values<'a>(
        &'a self,
        deltas: &'a [f64; 9],
    ) -> impl Iterator<Item = f64> + 'a {
        self.members().map(move |(i, _)| deltas[i])
    }
}

/// Which neighbors may donate colors and what range is scanned.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ScanMode {
    /// Neighbors not flagged in the mask; range spans their values.
    Usable,
    /// Every neighbor regardless of flags; full 0..=255 range.
    Fallback,
}

fn lower_median(values: &mut [u8]) -> u8 {
    values.sort_unstable();
    values[(values.len() - 1) / 2]
}

/// Candidate scan for one pixel of `image`. Returns `None` when no neighbor
/// qualifies as a donor.
fn scan_pixel(
    image: &Image,
    pending: &DamageMask,
    p: Coord,
    mode: ScanMode,
    config: &FilterConfig,
) -> Option<Rgb> {
    let graph = config.graph;
    let (width, height) = (image.width(), image.height());
    let kernel = WindowKernel::new(p, width, height, config.border, |a, b| {
        edge_weight(image.pixel(a), image.pixel(b), graph)
    });
    let mut colors = [Rgb::default(); 9];
    let mut donors = [false; 9];
    let mut donor_count = 0;
    for (i, q) in kernel.members() {
        colors[i] = image.pixel(q);
        donors[i] = mode == ScanMode::Fallback || config.donors == Donors::All || !pending.get(q);
        donor_count += donors[i] as usize;
    }
    if donor_count == 0 {
        return None;
    }

    let donor_colors: Vec<Rgb> = kernel
        .members()
        .filter(|&(i, _)| donors[i])
        .map(|(i, _)| colors[i])
        .collect();
    let scanned_channels = match image.channels() {
        Channels::Gray => 1,
        Channels::Rgb => 3,
    };
    let mut working = Rgb::default();
    for c in 0..3 {
        let mut vals: Vec<u8> = donor_colors.iter().map(|col| col.channel(c)).collect();
        working = working.with_channel(c, lower_median(&mut vals));
    }

    let score = |candidate: Rgb| -> f64 {
        let mut w = [0.0; 9];
        for (i, _) in kernel.members() {
            w[i] = edge_weight(candidate, colors[i], graph);
        }
        match kernel.deltas(&w) {
            Some(d) => {
                let donor_deltas = kernel
                    .members()
                    .filter(|&(i, _)| donors[i])
                    .map(|(i, _)| d[i]);
                match config.scoring {
                    Scoring::Best => donor_deltas.fold(f64::NEG_INFINITY, f64::max),
                    Scoring::Sum => donor_deltas.sum(),
                }
            }
            None => f64::NEG_INFINITY,
        }
    };

    for c in 0..scanned_channels {
        let (lo, hi) = match mode {
            ScanMode::Fallback => (0u8, 255u8),
            ScanMode::Usable => donor_colors.iter().fold((255u8, 0u8), |(lo, hi), col| {
                let v = col.channel(c);
                (lo.min(v), hi.max(v))
            }),
        };
        let mut best: Option<(u8, f64)> = None;
        for v in lo..=hi {
            let candidate = match image.channels() {
                Channels::Gray => Rgb::gray(v),
                Channels::Rgb => working.with_channel(c, v),
            };
            let s = score(candidate);
            if best.map_or(s > f64::NEG_INFINITY, |(_, b)| s > b) {
                best = Some((v, s));
            }
        }
        if let Some((v, _)) = best {
            working = match image.channels() {
                Channels::Gray => Rgb::gray(v),
                Channels::Rgb => working.with_channel(c, v),
            };
        }
    }
    Some(working)
}

/// Restored color for the flagged pixel `p`, or `Ok(None)` when every
/// neighbor is still flagged and the pixel has to wait for a later pass.
pub fn restore_pixel(
    image: &Image,
    mask: &DamageMask,
    p: Coord,
    config: &FilterConfig,
) -> Result<Option<Rgb>> {
    config.validate()?;
    check_mask(image, mask)?;
    image.get_pixel(p)?;
    if !mask.get(p) {
        return Err(Error::invalid(format!(
            "pixel ({}, {}) is not flagged as damaged",
            p.x, p.y
        )));
    }
    Ok(scan_pixel(image, mask, p, ScanMode::Usable, config))
}

fn check_mask(image: &Image, mask: &DamageMask) -> Result<()> {
    if mask.matches(image) {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "mask is {}x{} but image is {}x{}",
            mask.width(),
            mask.height(),
            image.width(),
            image.height()
        )))
    }
}

/// Repairs every flagged pixel; unflagged pixels are copied unchanged.
///
/// Pixels are visited in raster order and a repaired pixel immediately
/// becomes a donor for the ones after it. Pixels without any donor are
/// retried on the next pass, up to `max_passes`; whatever is left after that
/// is scanned over the full intensity range using all of its neighbors.
pub fn restore(image: &Image, mask: &DamageMask, config: &FilterConfig) -> Result<Image> {
    config.validate()?;
    check_mask(image, mask)?;
    let mut out = image.clone();
    let mut pending = mask.clone();
    for _ in 0..config.max_passes {
        let todo: Vec<Coord> = pending.flagged().collect();
        if todo.is_empty() {
            break;
        }
        let mut progressed = false;
        for p in todo {
            if let Some(color) = scan_pixel(&out, &pending, p, ScanMode::Usable, config) {
                out.set_pixel(p, color)?;
                pending.set(p, false);
                progressed = true;
            }
        }
        if !progressed {
            break;
        }
    }
    let leftovers: Vec<Coord> = pending.flagged().collect();
    for p in leftovers {
        if let Some(color) = scan_pixel(&out, &pending, p, ScanMode::Fallback, config) {
            out.set_pixel(p, color)?;
        }
        pending.set(p, false);
    }
    Ok(out)
}

/// Detection followed by repair.
///
/// With `rounds > 1` detection is repeated on the repaired image until it
/// comes back empty; the returned mask is the union of every round's
/// detections, so pixels outside it are untouched.
pub fn denoise(image: &Image, config: &FilterConfig) -> Result<(Image, DamageMask)> {
    config.validate()?;
    let mut current = image.clone();
    let mut union = DamageMask::for_image(image);
    for _ in 0..config.rounds {
        let mask = detect(&current, config)?;
        if mask.is_clear() {
            break;
        }
        current = restore(&current, &mask, config)?;
        for c in mask.flagged() {
            union.set(c, true);
        }
    }
    Ok((current, union))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modularity::ModularityMatrix;

    fn flat(w: usize, h: usize, v: u8) -> Image {
        Image::filled(w, h, Channels::Gray, Rgb::gray(v)).unwrap()
    }

    fn with_pixel(mut img: Image, c: Coord, v: Rgb) -> Image {
        img.set_pixel(c, v).unwrap();
        img
    }

    /// Merge deltas for the center of the window graph with the center color
    /// replaced, computed through `delta_q_direct` on a freshly built matrix.
    fn oracle_deltas(
        image: &Image,
        p: Coord,
        candidate: Rgb,
        cfg: &FilterConfig,
    ) -> Vec<(Coord, f64)> {
        let img = with_pixel(image.clone(), p, candidate);
        let graph = cfg.graph;
        let ctx =
            lattice::WindowContext::with_border(p, img.width(), img.height(), cfg.border).unwrap();
        let n = ctx.members.len();
        let mut raw = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if lattice::slots_adjacent(ctx.slots[i], ctx.slots[j]) {
                    raw[i * n + j] =
                        edge_weight(img.pixel(ctx.members[i]), img.pixel(ctx.members[j]), graph);
                }
            }
        }
        let m = ModularityMatrix::normalize(n, &raw, &vec![0.0; n]).unwrap();
        (0..n)
            .filter(|&j| j != ctx.center_index)
            .map(|j| {
                (
                    ctx.members[j],
                    m.delta_q_direct(ctx.center_index, j).unwrap(),
                )
            })
            .collect()
    }

    #[test]
    fn config_validation() {
        let ok = FilterConfig::default();
        assert!(ok.validate().is_ok());
        assert!(FilterConfig {
            k_min_negative: 0,
            ..ok
        }
        .validate()
        .is_err());
        assert!(FilterConfig {
            k_min_negative: 9,
            ..ok
        }
        .validate()
        .is_err());
        assert!(FilterConfig {
            epsilon: -1.0,
            ..ok
        }
        .validate()
        .is_err());
        assert!(FilterConfig {
            max_passes: 0,
            ..ok
        }
        .validate()
        .is_err());
        assert!(FilterConfig {
            graph: GraphConfig { h: 0.0 },
            ..ok
        }
        .validate()
        .is_err());
    }

    #[test]
    fn flat_interior_deltas() {
        let img = flat(5, 5, 128);
        let d = pixel_deltas(&img, Coord::new(2, 2), &FilterConfig::default()).unwrap();
        assert_eq!(d.len(), 8);
        for (q, delta) in d {
            let diagonal = q.x != 2 && q.y != 2;
            if diagonal {
                assert!((delta - 0.02).abs() < 1e-15);
            } else {
                assert!(delta.abs() < 1e-15);
            }
        }
    }

    #[test]
    fn outlier_sign_pattern() {
        let p = Coord::new(2, 2);
        let img = with_pixel(flat(5, 5, 128), p, Rgb::gray(10));
        let cfg = FilterConfig::default();
        let d = pixel_deltas(&img, p, &cfg).unwrap();
        let oracle = oracle_deltas(&img, p, Rgb::gray(10), &cfg);
        for ((q, delta), (oq, od)) in d.iter().zip(&oracle) {
            assert_eq!(q, oq);
            assert!((delta - od).abs() < 1e-9);
            let diagonal = q.x != 2 && q.y != 2;
            if diagonal {
                assert!(*delta > 0.0, "{q:?} {delta}");
            } else {
                assert!(*delta < 0.0, "{q:?} {delta}");
            }
        }
    }

    #[test]
    fn single_pixel_image_has_no_deltas() {
        let img = flat(1, 1, 0);
        assert!(
            pixel_deltas(&img, Coord::new(0, 0), &FilterConfig::default())
                .unwrap()
                .is_empty()
        );
        assert!(detect(&img, &FilterConfig::default()).unwrap().is_clear());
        let (out, mask) = denoise(&img, &FilterConfig::default()).unwrap();
        assert_eq!(out, img);
        assert!(mask.is_clear());
    }

    #[test]
    fn single_outlier_is_the_only_detection() {
        let p = Coord::new(8, 8);
        let img = with_pixel(flat(16, 16, 128), p, Rgb::gray(10));
        let cfg = FilterConfig::default();
        let mask = detect(&img, &cfg).unwrap();
        // oracle: apply the decision rule to the reference deltas everywhere
        for y in 0..16 {
            for x in 0..16 {
                let c = Coord::new(x, y);
                let negatives = pixel_deltas(&img, c, &cfg)
                    .unwrap()
                    .iter()
                    .filter(|(_, d)| *d < -1e-12)
                    .count();
                assert_eq!(mask.get(c), negatives >= 4, "{c:?}");
            }
        }
        assert_eq!(mask.flagged().collect::<Vec<_>>(), vec![p]);
        let (out, _) = denoise(&img, &cfg).unwrap();
        assert_eq!(out, flat(16, 16, 128));
    }

    #[test]
    fn clean_flat_image_has_no_detections() {
        for (w, h) in [(16, 16), (2, 2), (1, 5), (7, 3)] {
            assert!(detect(&flat(w, h, 77), &FilterConfig::default())
                .unwrap()
                .is_clear());
        }
    }

    #[test]
    fn huge_epsilon_never_flags() {
        let data: Vec<u8> = (0..12 * 12).map(|i| ((i * 7919) % 256) as u8).collect();
        let img = Image::from_raw(12, 12, Channels::Gray, data).unwrap();
        let cfg = FilterConfig {
            epsilon: 1.0,
            k_min_negative: 8,
            ..FilterConfig::default()
        };
        assert!(detect(&img, &cfg).unwrap().is_clear());
    }

    #[test]
    fn restore_pixel_examples() {
        let cfg = FilterConfig::default();
        let p = Coord::new(1, 1);
        let img = with_pixel(flat(3, 3, 128), p, Rgb::gray(3));
        let mut mask = DamageMask::for_image(&img);
        mask.set(p, true);
        assert_eq!(
            restore_pixel(&img, &mask, p, &cfg).unwrap(),
            Some(Rgb::gray(128))
        );

        let color = with_pixel(
            Image::filled(3, 3, Channels::Rgb, Rgb::gray(50)).unwrap(),
            p,
            Rgb::new(255, 0, 0),
        );
        assert_eq!(
            restore_pixel(&color, &mask, p, &cfg).unwrap(),
            Some(Rgb::gray(50))
        );

        let mut img = with_pixel(flat(3, 3, 200), p, Rgb::gray(10));
        img.set_pixel(Coord::new(0, 0), Rgb::gray(0)).unwrap();
        mask.set(Coord::new(0, 0), true);
        for donors in [Donors::Unflagged, Donors::All] {
            let cfg = FilterConfig { donors, ..cfg };
            assert_eq!(
                restore_pixel(&img, &mask, p, &cfg).unwrap(),
                Some(Rgb::gray(200))
            );
        }

        let unflagged = DamageMask::for_image(&img);
        assert!(restore_pixel(&img, &unflagged, p, &cfg).is_err());
    }

    #[test]
    fn restore_defers_when_surrounded() {
        let cfg = FilterConfig {
            donors: Donors::Unflagged,
            ..FilterConfig::default()
        };
        let img = flat(3, 3, 9);
        let mask = DamageMask::from_flags(3, 3, vec![true; 9]).unwrap();
        let p = Coord::new(1, 1);
        assert_eq!(restore_pixel(&img, &mask, p, &cfg).unwrap(), None);
        let all = FilterConfig::default();
        assert_eq!(
            restore_pixel(&img, &mask, p, &all).unwrap(),
            Some(Rgb::gray(9))
        );
    }

    #[test]
    fn restore_scan_matches_oracle() {
        // mixed neighborhood: the winner must maximise the summed oracle deltas
        let data = vec![10, 12, 200, 14, 99, 210, 11, 205, 220];
        let img = Image::from_raw(3, 3, Channels::Gray, data).unwrap();
        let p = Coord::new(1, 1);
        let mut mask = DamageMask::for_image(&img);
        mask.set(p, true);
        let cfg = FilterConfig::default();
        let got = restore_pixel(&img, &mask, p, &cfg).unwrap().unwrap();

        let mut best = (0u8, f64::NEG_INFINITY);
        for v in 10..=220u8 {
            let s: f64 = oracle_deltas(&img, p, Rgb::gray(v), &cfg)
                .into_iter()
                .map(|(_, d)| d)
                .sum();
            if s > best.1 + 1e-12 {
                best = (v, s);
            }
        }
        assert_eq!(got, Rgb::gray(best.0));
    }

    #[test]
    fn restore_identity_and_dimension_checks() {
        let data: Vec<u8> = (0..8 * 8 * 3).map(|i| (i * 31 % 256) as u8).collect();
        let img = Image::from_raw(8, 8, Channels::Rgb, data).unwrap();
        let cfg = FilterConfig::default();
        assert_eq!(
            restore(&img, &DamageMask::for_image(&img), &cfg).unwrap(),
            img
        );
        assert!(matches!(
            restore(&img, &DamageMask::new(7, 8), &cfg),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn block_of_damage_is_filled() {
        let clean = flat(10, 10, 90);
        let mut noisy = clean.clone();
        let mut mask = DamageMask::for_image(&clean);
        for (x, y) in [(4, 4), (5, 4), (4, 5), (5, 5)] {
            noisy.set_pixel(Coord::new(x, y), Rgb::gray(250)).unwrap();
            mask.set(Coord::new(x, y), true);
        }
        for donors in [Donors::Unflagged, Donors::All] {
            let cfg = FilterConfig {
                max_passes: 2,
                donors,
                ..FilterConfig::default()
            };
            assert_eq!(restore(&noisy, &mask, &cfg).unwrap(), clean);
        }
    }

    #[test]
    fn fully_flagged_image_uses_fallback() {
        let img = Image::from_raw(2, 2, Channels::Gray, vec![0, 255, 0, 255]).unwrap();
        let mask = DamageMask::from_flags(2, 2, vec![true; 4]).unwrap();
        let cfg = FilterConfig {
            donors: Donors::Unflagged,
            max_passes: 3,
            ..FilterConfig::default()
        };
        let out = restore(&img, &mask, &cfg).unwrap();
        // the first pixel is scanned over 0..=255 against all three neighbors
        let first = scan_pixel(
            &img,
            &DamageMask::for_image(&img),
            Coord::new(0, 0),
            ScanMode::Fallback,
            &cfg,
        );
        assert_eq!(Some(out.pixel(Coord::new(0, 0))), first);
    }

    #[test]
    fn global_scope_never_fires_on_large_graph() {
        let p = Coord::new(8, 8);
        let img = with_pixel(flat(16, 16, 128), p, Rgb::gray(10));
        let cfg = FilterConfig {
            scope: Scope::Global,
            ..FilterConfig::default()
        };
        let d = pixel_deltas(&img, p, &cfg).unwrap();
        assert_eq!(d.len(), 8);
        assert!(d.iter().all(|(_, v)| *v > 0.0));
        assert!(detect(&img, &cfg).unwrap().is_clear());
    }

    #[test]
    fn window_kernel_matches_matrix_route() {
        let data: Vec<u8> = (0..6 * 5 * 3)
            .map(|i| ((i * 97 + 13) % 256) as u8)
            .collect();
        let img = Image::from_raw(6, 5, Channels::Rgb, data).unwrap();
        let cfg = FilterConfig::default();
        let lw = LatticeWeights::new(&img, cfg.graph);
        for y in 0..5 {
            for x in 0..6 {
                let p = Coord::new(x, y);
                for border in [WindowBorder::Clip, WindowBorder::Reflect] {
                    let cfg = FilterConfig { border, ..cfg };
                    let k = WindowKernel::new(p, 6, 5, border, |a, b| lw.between(a, b));
                    let d = k.deltas(&k.center_weights(|q| lw.between(p, q))).unwrap();
                    let reference = pixel_deltas(&img, p, &cfg).unwrap();
                    let fast: Vec<f64> = k.neighbor_values(&d).collect();
                    assert_eq!(fast.len(), reference.len());
                    for (a, (_, b)) in fast.iter().zip(&reference) {
                        assert!((a - b).abs() < 1e-12);
                    }
                }
            }
        }
    }
}
