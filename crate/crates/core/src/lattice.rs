//! The weighted 8-connected pixel graph.
//!
//! Every pixel is a vertex joined to its in-bounds king-move neighbors by an
//! edge of weight `exp(-|p - q| / h)`, where `|p - q|` is the Euclidean
//! distance between the two RGB triples. Vertex self-weights start at zero.

use crate::error::{Error, Result};
use crate::image::{Coord, Image, Rgb};
use crate::modularity::{ModularityMatrix, DENSE_VERTEX_CAP};

pub const DEFAULT_H: f64 = 20.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GraphConfig {
    /// Color-distance scale on the 0..=255 intensity axis.
    pub h: f64,
}

impl GraphConfig {
    pub fn new(h: f64) -> Result<Self> {
        let cfg = GraphConfig { h };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.h > 0.0 && self.h.is_finite() {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "h must be a positive finite number, got {}",
                self.h
            )))
        }
    }
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig { h: DEFAULT_H }
    }
}

/// Squared Euclidean RGB distance.
#[inline]
pub fn color_distance_sq(p: Rgb, q: Rgb) -> u32 {
    let d = |a: u8, b: u8| {
        let d = a.abs_diff(b) as u32;
        d * d
    };
    d(p.r, q.r) + d(p.g, q.g) + d(p.b, q.b)
}

#[inline]
pub fn edge_weight(p: Rgb, q: Rgb, config: GraphConfig) -> f64 {
    (-(color_distance_sq(p, q) as f64).sqrt() / config.h).exp()
}

/// Row-major king-move offsets, center excluded.
pub(crate) const OFFSETS: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

#[inline]
pub(crate) fn offset(
    c: Coord,
    (dx, dy): (isize, isize),
    width: usize,
    height: usize,
) -> Option<Coord> {
    let x = c.x.checked_add_signed(dx)?;
    let y = c.y.checked_add_signed(dy)?;
    (x < width && y < height).then_some(Coord { x, y })
}

/// In-bounds pixels at Chebyshev distance 1 from `(x, y)`, row-major.
pub fn neighbors(x: usize, y: usize, width: usize, height: usize) -> Result<Vec<Coord>> {
    if x >= width || y >= height {
        return Err(Error::OutOfBounds {
            x,
            y,
            width,
            height,
        });
    }
    let c = Coord { x, y };
    Ok(OFFSETS
        .iter()
        .filter_map(|&o| offset(c, o, width, height))
        .collect())
}

#[inline]
pub(crate) fn adjacent(a: Coord, b: Coord) -> bool {
    a != b && a.x.abs_diff(b.x) <= 1 && a.y.abs_diff(b.y) <= 1
}

/// How a 3x3 window is completed where it overhangs the image.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum WindowBorder {
    /// Drop the missing cells.
    Clip,
    /// Mirror about the border pixel, so `-1` maps to `1` and `n` to `n - 2`.
    /// Images narrower or shorter than two pixels fall back to clipping.
    #[default]
    Reflect,
}

#[inline]
fn reflect(v: usize, d: isize, n: usize) -> usize {
    let t = v as isize + d;
    if t < 0 {
        (-t) as usize
    } else if t as usize >= n {
        2 * (n - 1) - t as usize
    } else {
        t as usize
    }
}

/// Cells of the 3x3 window around `center` as `(slot offset, pixel)` pairs in
/// row-major slot order.
pub(crate) fn window_cells(
    center: Coord,
    width: usize,
    height: usize,
    border: WindowBorder,
) -> impl Iterator<Item = ((isize, isize), Coord)> {
    let mirror = border == WindowBorder::Reflect && width >= 2 && height >= 2;
    (-1isize..=1)
        .flat_map(|dy| (-1isize..=1).map(move |dx| (dx, dy)))
        .filter_map(move |(dx, dy)| {
            let c = if mirror {
                Coord {
                    x: reflect(center.x, dx, width),
                    y: reflect(center.y, dy, height),
                }
            } else {
                offset(center, (dx, dy), width, height)?
            };
            Some(((dx, dy), c))
        })
}

#[inline]
pub(crate) fn slots_adjacent(a: (isize, isize), b: (isize, isize)) -> bool {
    a != b && a.0.abs_diff(b.0) <= 1 && a.1.abs_diff(b.1) <= 1
}

/// The cells of a 3x3 window, in row-major order. Under
/// [`WindowBorder::Reflect`] a pixel may fill more than one cell; adjacency
/// follows the cell grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindowContext {
    pub center: Coord,
    pub members: Vec<Coord>,
    pub slots: Vec<(isize, isize)>,
    pub center_index: usize,
}

impl WindowContext {
    /// Clipped window.
    pub fn new(center: Coord, width: usize, height: usize) -> Result<Self> {
        Self::with_border(center, width, height, WindowBorder::Clip)
    }

    pub fn with_border(
        center: Coord,
        width: usize,
        height: usize,
        border: WindowBorder,
    ) -> Result<Self> {
        if center.x >= width || center.y >= height {
            return Err(Error::OutOfBounds {
                x: center.x,
                y: center.y,
                width,
                height,
            });
        }
        let (slots, members): (Vec<_>, Vec<_>) =
            window_cells(center, width, height, border).unzip();
        let center_index = slots
            .iter()
            .position(|&s| s == (0, 0))
            .expect("center lies inside its own window");
        Ok(WindowContext {
            center,
            members,
            slots,
            center_index,
        })
    }

    /// Index of the first cell holding `c`, if any.
    pub fn index_of(&self, c: Coord) -> Option<usize> {
        self.members.iter().position(|&m| m == c)
    }
}

fn graph_over(
    image: &Image,
    members: &[Coord],
    linked: impl Fn(usize, usize) -> bool,
    config: GraphConfig,
) -> Result<ModularityMatrix> {
    let n = members.len();
    let colors: Vec<Rgb> = members.iter().map(|&c| image.pixel(c)).collect();
    let mut raw = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            if linked(i, j) {
                let w = edge_weight(colors[i], colors[j], config);
                raw[i * n + j] = w;
                raw[j * n + i] = w;
            }
        }
    }
    ModularityMatrix::normalize(n, &raw, &vec![0.0; n])
}

/// The lattice graph restricted to the clipped 3x3 window around `center`,
/// normalized by its own total weight.
pub fn window_graph(
    image: &Image,
    center: Coord,
    config: GraphConfig,
) -> Result<(ModularityMatrix, WindowContext)> {
    window_graph_with(image, center, config, WindowBorder::Clip)
}

pub fn window_graph_with(
    image: &Image,
    center: Coord,
    config: GraphConfig,
    border: WindowBorder,
) -> Result<(ModularityMatrix, WindowContext)> {
    config.validate()?;
    let ctx = WindowContext::with_border(center, image.width(), image.height(), border)?;
    let m = graph_over(
        image,
        &ctx.members,
        |i, j| slots_adjacent(ctx.slots[i], ctx.slots[j]),
        config,
    )?;
    Ok((m, ctx))
}

/// The whole-image lattice graph as a dense matrix; vertex `y * width + x`
/// is pixel `(x, y)`.
pub fn global_graph(image: &Image, config: GraphConfig) -> Result<ModularityMatrix> {
    global_graph_capped(image, config, DENSE_VERTEX_CAP)
}

pub fn global_graph_capped(
    image: &Image,
    config: GraphConfig,
    cap: usize,
) -> Result<ModularityMatrix> {
    config.validate()?;
    let n = image.pixel_count();
    if n > cap.min(DENSE_VERTEX_CAP) {
        return Err(Error::TooLarge {
            vertices: n,
            cap: cap.min(DENSE_VERTEX_CAP),
        });
    }
    let w = image.width();
    let members: Vec<Coord> = (0..n).map(|i| Coord { x: i % w, y: i / w }).collect();
    graph_over(
        image,
        &members,
        |i, j| adjacent(members[i], members[j]),
        config,
    )
}

/// Edge weights of the full lattice, four per pixel (east, south-west,
/// south, south-east), so each undirected edge is evaluated once.
#[derive(Clone, Debug)]
pub(crate) struct LatticeWeights {
    width: usize,
    height: usize,
    forward: Vec<[f64; 4]>,
}

impl LatticeWeights {
    const FORWARD: [(isize, isize); 4] = [(1, 0), (-1, 1), (0, 1), (1, 1)];

    pub(crate) fn new(image: &Image, config: GraphConfig) -> Self {
        use rayon::prelude::*;
        let (width, height) = (image.width(), image.height());
        let mut forward = vec![[0.0; 4]; width * height];
        forward
            .par_chunks_mut(width)
            .enumerate()
            .for_each(|(y, row)| {
                for (x, slot) in row.iter_mut().enumerate() {
                    let c = Coord { x, y };
                    let p = image.pixel(c);
                    for (k, &o) in Self::FORWARD.iter().enumerate() {
                        if let Some(q) = offset(c, o, width, height) {
                            slot[k] = edge_weight(p, image.pixel(q), config);
                        }
                    }
                }
            });
        LatticeWeights {
            width,
            height,
            forward,
        }
    }

    /// Weight of the edge between two adjacent pixels.
    #[inline]
    pub(crate) fn between(&self, a: Coord, b: Coord) -> f64 {
        let (a, b) = if (a.y, a.x) < (b.y, b.x) {
            (a, b)
        } else {
            (b, a)
        };
        let dx = b.x as isize - a.x as isize;
        let dy = b.y as isize - a.y as isize;
        let k = match (dx, dy) {
            (1, 0) => 0,
            (-1, 1) => 1,
            (0, 1) => 2,
            (1, 1) => 3,
            _ => unreachable!("pixels {a:?} and {b:?} are not adjacent"),
        };
        self.forward[a.y * self.width + a.x][k]
    }

    pub(crate) fn width(&self) -> usize {
        self.width
    }

    pub(crate) fn height(&self) -> usize {
        self.height
    }
}
