//! Noise-sweep harness comparing the modularity filter with the median
//! baseline.
//!
//! For every `(p, seed)` pair the source image is corrupted, repaired by
//! both filters and scored. The CSV has one row per pair, sorted by `p`
//! then seed, followed by one average row per `p` with `seed = -1`.

use std::io::Write;
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::filter::{denoise, FilterConfig};
use crate::image::Image;
use crate::median::median_filter;
use crate::metrics::{mask_scores, relative_improvement};
use crate::noise::{inject, NoiseMode, NoiseSpec, DEFAULT_LCG_A, DEFAULT_LCG_C};

pub const CSV_HEADER: &str =
    "p_percent,delta_proposed,delta_median,precision,recall,runtime_ms_proposed,runtime_ms_median,seed";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub p_percent: f64,
    pub delta_proposed: f64,
    pub delta_median: f64,
    pub precision: f64,
    pub recall: f64,
    pub runtime_ms_proposed: f64,
    pub runtime_ms_median: f64,
    pub seed: i64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub p_percents: Vec<f64>,
    pub seeds: Vec<u32>,
    pub mode: NoiseMode,
    pub filter: FilterConfig,
    pub lcg_a: u32,
    pub lcg_c: u32,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            p_percents: (1..=7).map(|k| 10.0 * k as f64).collect(),
            seeds: vec![1, 2, 3],
            mode: NoiseMode::RandomValue,
            filter: FilterConfig::default(),
            lcg_a: DEFAULT_LCG_A,
            lcg_c: DEFAULT_LCG_C,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        self.filter.validate()?;
        if self.p_percents.is_empty() || self.seeds.is_empty() {
            return Err(Error::invalid("need at least one noise level and one seed"));
        }
        if let Some(p) = self.p_percents.iter().find(|p| !(**p > 0.0 && **p < 100.0)) {
            return Err(Error::invalid(format!(
                "noise percentages must lie in (0, 100), got {p}"
            )));
        }
        Ok(())
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64() * 1e3)
}

/// One data row for a single noise level and seed.
pub fn bench_case(
    image: &Image,
    p_percent: f64,
    seed: u32,
    config: &BenchConfig,
) -> Result<BenchRow> {
    let spec = NoiseSpec {
        p: p_percent / 100.0,
        mode: config.mode,
        seed,
        lcg_a: config.lcg_a,
        lcg_c: config.lcg_c,
    };
    let (noisy, truth) = inject(image, &spec)?;
    let (proposed, ms_proposed) = timed(|| denoise(&noisy, &config.filter));
    let (restored, detected) = proposed?;
    let (median, ms_median) = timed(|| median_filter(&noisy));
    let (precision, recall) = mask_scores(&truth, &detected)?;
    Ok(BenchRow {
        p_percent,
        delta_proposed: relative_improvement(image, &noisy, &restored)?,
        delta_median: relative_improvement(image, &noisy, &median)?,
        precision,
        recall,
        runtime_ms_proposed: ms_proposed,
        runtime_ms_median: ms_median,
        seed: seed as i64,
    })
}

/// Arithmetic mean of every column, tagged with `seed = -1`.
pub fn average(rows: &[BenchRow]) -> BenchRow {
    let n = rows.len() as f64;
    let mean = |f: fn(&BenchRow) -> f64| rows.iter().map(f).sum::<f64>() / n;
    BenchRow {
        p_percent: rows[0].p_percent,
        delta_proposed: mean(|r| r.delta_proposed),
        delta_median: mean(|r| r.delta_median),
        precision: mean(|r| r.precision),
        recall: mean(|r| r.recall),
        runtime_ms_proposed: mean(|r| r.runtime_ms_proposed),
        runtime_ms_median: mean(|r| r.runtime_ms_median),
        seed: -1,
    }
}

/// Data rows sorted by `(p, seed)`, then the per-`p` averages.
pub fn run_bench(image: &Image, config: &BenchConfig) -> Result<Vec<BenchRow>> {
    config.validate()?;
    let mut ps = config.p_percents.clone();
    ps.sort_by(f64::total_cmp);
    ps.dedup();
    let mut seeds = config.seeds.clone();
    seeds.sort_unstable();
    seeds.dedup();

    let mut data = Vec::with_capacity(ps.len() * seeds.len());
    let mut averages = Vec::with_capacity(ps.len());
    for &p in &ps {
        let group = seeds
            .iter()
            .map(|&s| bench_case(image, p, s, config))
            .collect::<Result<Vec<_>>>()?;
        averages.push(average(&group));
        data.extend(group);
    }
    data.extend(averages);
    Ok(data)
}

pub fn write_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    w.flush()?;
    Ok(())
}
