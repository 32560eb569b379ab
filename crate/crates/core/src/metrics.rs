//! Image distance, relative improvement and detector scores.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::image::Image;
use crate::mask::DamageMask;

/// Per-channel mean absolute difference over all pixels, maximised over
/// channels. Range `[0, 255]`.
pub fn image_distance(a: &Image, c: &Image) -> Result<f64> {
    if !a.same_shape(c) {
        return Err(Error::DimensionMismatch(format!(
            "{}x{}x{} vs {}x{}x{}",
            a.width(),
            a.height(),
            a.channels().count(),
            c.width(),
            c.height(),
            c.channels().count()
        )));
    }
    let ch = a.channels().count();
    let mut sums = [0u64; 3];
    for (pa, pc) in a.data().chunks_exact(ch).zip(c.data().chunks_exact(ch)) {
        for k in 0..ch {
            sums[k] += pa[k].abs_diff(pc[k]) as u64;
        }
    }
    let n = a.pixel_count() as f64;
    Ok(sums[..ch].iter().map(|&s| s as f64 / n).fold(0.0, f64::max))
}

/// `(d(orig, noisy) - d(orig, restored)) / d(orig, noisy) * 100`.
pub fn relative_improvement(orig: &Image, noisy: &Image, restored: &Image) -> Result<f64> {
    let before = image_distance(orig, noisy)?;
    let after = image_distance(orig, restored)?;
    if before == 0.0 {
        return Err(Error::UndefinedImprovement);
    }
    Ok((before - after) / before * 100.0)
}

/// `(precision, recall)` of `detected` against `truth`. Both default to 1
/// when their denominator is empty.
pub fn mask_scores(truth: &DamageMask, detected: &DamageMask) -> Result<(f64, f64)> {
    if truth.width() != detected.width() || truth.height() != detected.height() {
        return Err(Error::DimensionMismatch(format!(
            "masks are {}x{} and {}x{}",
            truth.width(),
            truth.height(),
            detected.width(),
            detected.height()
        )));
    }
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for (&t, &d) in truth.flags().iter().zip(detected.flags()) {
        match (t, d) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            (false, false) => {}
        }
    }
    let ratio = |num: usize, den: usize| {
        if den == 0 {
            1.0
        } else {
            num as f64 / den as f64
        }
    };
    Ok((ratio(tp, tp + fp), ratio(tp, tp + fn_)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalReport {
    pub d_orig_noisy: f64,
    pub d_orig_restored: f64,
    pub delta_improvement_percent: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recall: Option<f64>,
}

impl EvalReport {
    /// `masks` is `(truth, detected)`; precision and recall are left out
    /// without it.
    pub fn evaluate(
        orig: &Image,
        noisy: &Image,
        restored: &Image,
        masks: Option<(&DamageMask, &DamageMask)>,
    ) -> Result<Self> {
        let (precision, recall) = match masks {
            Some((t, d)) => {
                let (p, r) = mask_scores(t, d)?;
                (Some(p), Some(r))
            }
            None => (None, None),
        };
        Ok(EvalReport {
            d_orig_noisy: image_distance(orig, noisy)?,
            d_orig_restored: image_distance(orig, restored)?,
            delta_improvement_percent: relative_improvement(orig, noisy, restored)?,
            precision,
            recall,
        })
    }
}
