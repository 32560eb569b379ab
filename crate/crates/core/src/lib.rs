//! Impulse-noise removal on the weighted 8-connected pixel graph.
//!
//! Each pixel is tested by merging it with each of its neighbors and
//! checking the sign of the resulting Newman modularity change; pixels that
//! would lower modularity are flagged as damaged and repaired by scanning
//! candidate colors for the best merge. A 3x3 median filter, reproducible
//! LCG noise injection and a benchmark harness are included for comparison.

pub mod bench;
pub mod error;
pub mod filter;
pub mod image;
pub mod lattice;
pub mod mask;
pub mod median;
pub mod metrics;
pub mod modularity;
pub mod noise;
pub mod synthetic;

pub use error::{Error, Result};
pub use filter::{
    denoise, detect, pixel_deltas, restore, restore_pixel, Aggregation, Donors, FilterConfig,
    Scope, Scoring,
};
pub use image::{Channels, Coord, Image, Rgb};
pub use lattice::{
    edge_weight, global_graph, neighbors, window_graph, window_graph_with, GraphConfig,
    WindowBorder, WindowContext,
};
pub use mask::DamageMask;
pub use median::{median_filter, window_median};
pub use metrics::{image_distance, mask_scores, relative_improvement, EvalReport};
pub use modularity::ModularityMatrix;
pub use noise::{inject, lcg_next, sample_damage, NoiseMode, NoiseSpec};
pub use synthetic::{generate_synthetic, SyntheticKind, SyntheticSpec};
