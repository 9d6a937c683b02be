//! Structured hinge-loss subgradients of the snake energy with respect to
//! its parameter maps, and a direct per-pixel parameter fit driven by them.
//!
//! The subgradients compare a ground-truth contour `y` with the snake's
//! prediction `ŷ`:
//!
//! * `dα = Σ|Δy|² − Σ|Δŷ|²` (forward differences)
//! * `dβ(p) = Σ_{s: y_s→p} |Δ²y_s|² − Σ_{s: ŷ_s→p} |Δ²ŷ_s|²`, nodes attributed to
//!   their nearest pixel
//! * `dκ(p) = [p ∈ Ω(y)] − [p ∈ Ω(ŷ)]`
//! * `dmask = soft mask − ground truth`

use log::warn;

use crate::error::{Error, Result};
use crate::field::{BinaryMask, Pixel, ScalarField};
use crate::flow::ForceField;
use crate::geometry::{rasterize, Contour, Point};
use crate::metrics::iou;
use crate::snake::{evolve, ParameterSet, SnakeConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct SubgradientMaps {
    pub d_alpha: f64,
    pub d_beta: ScalarField,
    pub d_kappa: ScalarField,
    /// Only present when a soft initialization mask was supplied.
    pub d_mask: Option<ScalarField>,
}

impl SubgradientMaps {
    pub fn compute(gt: &Contour, pred: &Contour, width: usize, height: usize) -> Result<Self> {
        Ok(SubgradientMaps {
            d_alpha: subgrad_alpha(gt, pred),
            d_beta: subgrad_beta(gt, pred, width, height)?,
            d_kappa: subgrad_kappa(gt, pred, width, height)?,
            d_mask: None,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.d_alpha == 0.0
            && self.d_beta.values().iter().all(|&x| x == 0.0)
            && self.d_kappa.values().iter().all(|&x| x == 0.0)
    }
}

pub fn subgrad_alpha(gt: &Contour, pred: &Contour) -> f64 {
    let total = |c: &Contour| c.first_differences().iter().map(|d| d.norm_sq()).sum::<f64>();
    total(gt) - total(pred)
}

fn accumulate_curvature(c: &Contour, width: usize, height: usize) -> Result<ScalarField> {
    let mut out = ScalarField::filled(width, height, 0.0)?;
    for (node, d2) in c.nodes().iter().zip(c.second_differences()) {
        if let Some((u, v)) = node.nearest_pixel(width, height) {
            let x = out.get(u, v) + d2.norm_sq();
            out.set(u, v, x);
        }
    }
    Ok(out)
}

pub fn subgrad_beta(gt: &Contour, pred: &Contour, width: usize, height: usize) -> Result<ScalarField> {
    // accumulate separately so identical contours cancel exactly
    let a = accumulate_curvature(gt, width, height)?;
    let b = accumulate_curvature(pred, width, height)?;
    ScalarField::new(
        width,
        height,
        a.values().iter().zip(b.values()).map(|(x, y)| x - y).collect(),
    )
}

pub fn subgrad_kappa(gt: &Contour, pred: &Contour, width: usize, height: usize) -> Result<ScalarField> {
    let a = rasterize(gt, width, height)?.mask;
    let b = rasterize(pred, width, height)?.mask;
    ScalarField::new(
        width,
        height,
        a.bits()
            .iter()
            .zip(b.bits())
            .map(|(&x, &y)| x as i32 as f64 - y as i32 as f64)
            .collect(),
    )
}

/// `soft - gt`. Soft values outside `[0, 1]` are clamped first.
pub fn subgrad_mask(soft: &ScalarField, gt: &BinaryMask) -> Result<ScalarField> {
    gt.ensure_dims(soft.dims())?;
    let out_of_range = soft.values().iter().filter(|&&x| !(0.0..=1.0).contains(&x)).count();
    if out_of_range > 0 {
        warn!("soft mask has {out_of_range} values outside [0, 1]; clamping");
    }
    let (w, h) = soft.dims();
    ScalarField::new(
        w,
        h,
        soft.values()
            .iter()
            .zip(gt.bits())
            .map(|(&s, &g)| s.clamp(0.0, 1.0) - if g { 1.0 } else { 0.0 })
            .collect(),
    )
}

const NEIGHBORS: [(isize, isize); 8] = [
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
];

fn neighbor_index(du: isize, dv: isize) -> usize {
    NEIGHBORS
        .iter()
        .position(|&d| d == (du, dv))
        .expect("backtrack pixel is an 8-neighbor")
}

/// Outer boundary of the 8-connected component containing the first
/// foreground pixel in raster order, traced by Moore-neighbor following.
/// Returns pixel centers in traversal order without repeating the start.
pub fn trace_boundary(mask: &BinaryMask) -> Result<Vec<Pixel>> {
    let start = mask.foreground().next().ok_or(Error::EmptyMask)?;
    let fg = |u: isize, v: isize| mask.get_signed(u, v);
    let s = (start.u as isize, start.v as isize);
    let start_back = (s.0 - 1, s.1);
    let mut cur = s;
    let mut back = start_back;
    let mut out = vec![start];
    let cap = 4 * mask.bits().len() + 8;
    for _ in 0..cap {
        let k0 = neighbor_index(back.0 - cur.0, back.1 - cur.1);
        let mut found = None;
        for i in 1..=8 {
            let k = (k0 + i) % 8;
            let n = (cur.0 + NEIGHBORS[k].0, cur.1 + NEIGHBORS[k].1);
            if fg(n.0, n.1) {
                let kb = (k0 + i - 1) % 8;
                found = Some((n, (cur.0 + NEIGHBORS[kb].0, cur.1 + NEIGHBORS[kb].1)));
                break;
            }
        }
        let Some((next, next_back)) = found else {
            // isolated pixel
            return Ok(out);
        };
        if next == s && next_back == start_back {
            return Ok(out);
        }
        cur = next;
        back = next_back;
        if cur == s {
            // revisiting the start through another entry; keep tracing
            continue;
        }
        out.push(Pixel::new(cur.0 as usize, cur.1 as usize));
    }
    Ok(out)
}

/// Ground-truth contour for a mask: its traced outer boundary resampled to
/// `nodes` points at uniform arc length.
pub fn ground_truth_contour(mask: &BinaryMask, nodes: usize) -> Result<Contour> {
    let mut pts: Vec<Point> = trace_boundary(mask)?.into_iter().map(Pixel::to_point).collect();
    while pts.len() < 3 {
        // tiny components: pad so the polygon is well-formed (zero area)
        pts.push(pts[0]);
    }
    Contour::new(pts)?.resampled(nodes)
}

/// Cyclic shift of `gt` minimizing the mean node distance to `pred`.
/// Both contours must have the same node count.
pub fn align_to(gt: &Contour, pred: &Contour) -> Result<Contour> {
    if gt.len() != pred.len() {
        return Err(Error::InvalidParameter(format!(
            "cannot align contours of {} and {} nodes",
            gt.len(),
            pred.len()
        )));
    }
    let n = gt.len();
    let cost = |k: usize| -> f64 {
        (0..n)
            .map(|s| gt.nodes()[(s + k) % n].distance(pred.nodes()[s]))
            .sum()
    };
    let best = (0..n)
        .min_by(|&a, &b| cost(a).total_cmp(&cost(b)))
        .unwrap_or(0);
    Ok(gt.rotated(best))
}

/// One projected subgradient step.
///
/// `α` and `β` descend their subgradients and are projected onto `[0, ∞)`.
/// The balloon term pushes along the outward normal for positive `κ`, so
/// the region energy that generates it is `−Σ_Ω κ` and `κ` moves along
/// `+dκ`: it grows where the ground truth covers pixels the prediction
/// misses.
pub fn apply_subgradients(params: &ParameterSet, maps: &SubgradientMaps, learn_rate: f64) -> Result<ParameterSet> {
    let alpha = (params.alpha() - learn_rate * maps.d_alpha).max(0.0);
    let beta = ScalarField::new(
        maps.d_beta.width(),
        maps.d_beta.height(),
        params
            .beta()
            .values()
            .iter()
            .zip(maps.d_beta.values())
            .map(|(&b, &d)| (b - learn_rate * d).max(0.0))
            .collect(),
    )?;
    let kappa = ScalarField::new(
        maps.d_kappa.width(),
        maps.d_kappa.height(),
        params
            .kappa()
            .values()
            .iter()
            .zip(maps.d_kappa.values())
            .map(|(&k, &d)| k + learn_rate * d)
            .collect(),
    )?;
    ParameterSet::new(alpha, beta, kappa)
}

#[derive(Debug, Clone)]
pub struct FitReport {
    /// Parameters with the best IoU seen.
    pub params: ParameterSet,
    pub best_iou: f64,
    pub best_epoch: usize,
    /// IoU under the starting parameters.
    pub initial_iou: f64,
    /// IoU at every epoch, before that epoch's update.
    pub history: Vec<f64>,
}

/// Fits `α`, `β` and `κ` to one image by repeated inference and projected
/// subgradient steps.
pub fn fit_parameters(
    gt_mask: &BinaryMask,
    init: &Contour,
    force: &ForceField,
    initial: ParameterSet,
    config: &SnakeConfig,
    learn_rate: f64,
    epochs: usize,
) -> Result<FitReport> {
    gt_mask.ensure_dims(force.dims())?;
    let (w, h) = gt_mask.dims();
    let gt = ground_truth_contour(gt_mask, init.len())?;
    let mut params = initial;
    let mut best = None::<(ParameterSet, f64, usize)>;
    let mut history = Vec::with_capacity(epochs + 1);
    for epoch in 0..=epochs {
        let wrap = |e: Error| Error::Fit { epoch, source: Box::new(e) };
        let (pred, _) = evolve(init, force, &params, config).map_err(wrap)?;
        let score = iou(&rasterize(&pred, w, h).map_err(wrap)?.mask, gt_mask).map_err(wrap)?;
        history.push(score);
        if best.as_ref().map_or(true, |b| score > b.1) {
            best = Some((params.clone(), score, epoch));
        }
        if epoch == epochs {
            break;
        }
        let aligned = align_to(&gt, &pred).map_err(wrap)?;
        let maps = SubgradientMaps::compute(&aligned, &pred, w, h).map_err(wrap)?;
        params = apply_subgradients(&params, &maps, learn_rate).map_err(wrap)?;
    }
    let (params, best_iou, best_epoch) = best.expect("at least one epoch evaluated");
    Ok(FitReport {
        params,
        best_iou,
        best_epoch,
        initial_iou: history[0],
        history,
    })
}
