//! Region overlap and boundary agreement between a predicted and a
//! ground-truth mask.

use crate::distance::edt_exact;
use crate::error::Result;
use crate::field::BinaryMask;

/// Matching thresholds (pixels) averaged by [`boundf`].
pub const BOUNDF_THRESHOLDS: [f64; 5] = [1.0, 2.0, 3.0, 4.0, 5.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub iou: f64,
    pub dice: f64,
    pub boundf: f64,
    pub boundf_per_threshold: [f64; 5],
}

fn overlap_counts(pred: &BinaryMask, gt: &BinaryMask) -> Result<(usize, usize, usize)> {
    pred.ensure_dims(gt.dims())?;
    let mut inter = 0;
    let mut np = 0;
    let mut ng = 0;
    for (&p, &g) in pred.bits().iter().zip(gt.bits()) {
        inter += (p && g) as usize;
        np += p as usize;
        ng += g as usize;
    }
    Ok((inter, np, ng))
}

/// `|pred ∩ gt| / |pred ∪ gt|`, 1 when both are empty.
pub fn iou(pred: &BinaryMask, gt: &BinaryMask) -> Result<f64> {
    let (inter, np, ng) = overlap_counts(pred, gt)?;
    let union = np + ng - inter;
    if union == 0 {
        return Ok(1.0);
    }
    Ok(inter as f64 / union as f64)
}

/// `2 |pred ∩ gt| / (|pred| + |gt|)`, 1 when both are empty.
pub fn dice(pred: &BinaryMask, gt: &BinaryMask) -> Result<f64> {
    let (inter, np, ng) = overlap_counts(pred, gt)?;
    if np + ng == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * inter as f64 / (np + ng) as f64)
}

/// Boundary F1 at each threshold in [`BOUNDF_THRESHOLDS`] and their mean.
///
/// Boundaries are the masks' inner 4-connected boundaries. A boundary pixel
/// matches at threshold `t` when the Euclidean distance to the other mask's
/// boundary is at most `t`.
pub fn boundf(pred: &BinaryMask, gt: &BinaryMask) -> Result<(f64, [f64; 5])> {
    pred.ensure_dims(gt.dims())?;
    let (w, h) = gt.dims();
    let pb = pred.boundary_pixels();
    let gb = gt.boundary_pixels();
    if pb.is_empty() && gb.is_empty() {
        return Ok((1.0, [1.0; 5]));
    }
    if pb.is_empty() || gb.is_empty() {
        return Ok((0.0, [0.0; 5]));
    }
    let to_gt = edt_exact(&gb, w, h)?;
    let to_pred = edt_exact(&pb, w, h)?;
    let mut per = [0.0; 5];
    for (slot, &t) in per.iter_mut().zip(BOUNDF_THRESHOLDS.iter()) {
        let precision = pb.iter().filter(|p| to_gt.get(p.u, p.v) <= t).count() as f64 / pb.len() as f64;
        let recall = gb.iter().filter(|p| to_pred.get(p.u, p.v) <= t).count() as f64 / gb.len() as f64;
        *slot = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
    }
    let mean = per.iter().sum::<f64>() / per.len() as f64;
    Ok((mean, per))
}

pub fn evaluate(pred: &BinaryMask, gt: &BinaryMask) -> Result<MetricsReport> {
    let (boundf, boundf_per_threshold) = boundf(pred, gt)?;
    Ok(MetricsReport {
        iou: iou(pred, gt)?,
        dice: dice(pred, gt)?,
        boundf,
        boundf_per_threshold,
    })
}
