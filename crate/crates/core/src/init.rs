//! Automatic initialization from a mask: the largest inscribed circle, the
//! smallest enclosing circle, and a coordinate-descent circle fit that
//! refines either one against the mask.

use std::str::FromStr;

use crate::distance::interior_distance;
use crate::error::{Error, Result};
use crate::field::BinaryMask;
use crate::geometry::{Circle, Contour, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InitMode {
    Inscribed,
    Circumscribed,
}

impl FromStr for InitMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inscribed" => Ok(InitMode::Inscribed),
            "circumscribed" => Ok(InitMode::Circumscribed),
            other => Err(Error::InvalidParameter(format!("unknown init mode {other:?}"))),
        }
    }
}

impl InitMode {
    pub fn name(self) -> &'static str {
        match self {
            InitMode::Inscribed => "inscribed",
            InitMode::Circumscribed => "circumscribed",
        }
    }
}

/// Largest circle centered on a pixel whose strict interior holds only
/// foreground pixel centers. The center maximizes the distance to the
/// nearest background pixel (off-frame counts as background); ties go to
/// the smallest `(row, column)`.
pub fn inscribed_circle(mask: &BinaryMask) -> Result<Circle> {
    let d = interior_distance(mask)?;
    let mut best = (0usize, 0usize, f64::NEG_INFINITY);
    for v in 0..mask.height() {
        for u in 0..mask.width() {
            let x = d.get(u, v);
            if x > best.2 {
                best = (u, v, x);
            }
        }
    }
    Circle::new(Point::new(best.0 as f64, best.1 as f64), best.2)
}

/// Smallest circle enclosing every foreground pixel center, padded by half a
/// pixel so the foreground pixel squares' centers sit strictly inside.
pub fn circumscribed_circle(mask: &BinaryMask) -> Result<Circle> {
    let points: Vec<Point> = mask.foreground().map(|p| p.to_point()).collect();
    if points.is_empty() {
        return Err(Error::EmptyMask);
    }
    let (center, radius) = minimal_enclosing_circle(&points);
    Circle::new(center, radius + 0.5)
}

/// Convex hull by Andrew's monotone chain, collinear points dropped.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.u.total_cmp(&b.u).then(a.v.total_cmp(&b.v)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let turn = |o: Point, a: Point, b: Point| (a - o).cross(b - o);
    let mut lower: Vec<Point> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while lower.len() >= 2 && turn(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point> = Vec::with_capacity(pts.len());
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && turn(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Exact minimal enclosing circle `(center, radius)` of a non-empty point set.
///
/// Incremental algorithm over the hull vertices in a fixed pseudo-random
/// order, so results are deterministic.
pub fn minimal_enclosing_circle(points: &[Point]) -> (Point, f64) {
    assert!(!points.is_empty(), "minimal_enclosing_circle on empty set");
    let mut pts = convex_hull(points);
    if pts.is_empty() {
        pts.push(points[0]);
    }
    shuffle(&mut pts);

    let contains = |c: Point, r: f64, p: Point| p.distance(c) <= r * (1.0 + 1e-12) + 1e-9;
    let mut c = pts[0];
    let mut r = 0.0;
    for i in 1..pts.len() {
        if contains(c, r, pts[i]) {
            continue;
        }
        c = pts[i];
        r = 0.0;
        for j in 0..i {
            if contains(c, r, pts[j]) {
                continue;
            }
            (c, r) = diametral(pts[i], pts[j]);
            for k in 0..j {
                if contains(c, r, pts[k]) {
                    continue;
                }
                (c, r) = circumcircle(pts[i], pts[j], pts[k]);
            }
        }
    }
    (c, r)
}

fn shuffle(pts: &mut [Point]) {
    let mut state: u64 = 0x9E37_79B9_7F4A_7C15;
    for i in (1..pts.len()).rev() {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        let j = (state % (i as u64 + 1)) as usize;
        pts.swap(i, j);
    }
}

pub(crate) fn diametral(a: Point, b: Point) -> (Point, f64) {
    let c = (a + b) * 0.5;
    (c, a.distance(b) / 2.0)
}

/// Circle through three points; falls back to the widest diametral circle
/// when they are collinear.
pub(crate) fn circumcircle(a: Point, b: Point, c: Point) -> (Point, f64) {
    let ab = b - a;
    let ac = c - a;
    let d = 2.0 * ab.cross(ac);
    if d.abs() < 1e-12 {
        let candidates = [diametral(a, b), diametral(a, c), diametral(b, c)];
        return candidates
            .into_iter()
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
    }
    let ab2 = ab.norm_sq();
    let ac2 = ac.norm_sq();
    let center = a + Point::new((ac.v * ab2 - ab.v * ac2) / d, (ab.u * ac2 - ac.u * ab2) / d);
    (center, center.distance(a))
}

/// Coordinate descent on `(center u, center v, radius)` minimizing the
/// symmetric difference between the circle's raster and the mask.
///
/// In inscribed mode the circle raster must stay inside the mask, in
/// circumscribed mode the mask must stay inside the circle raster. Starts
/// from the exact circle of the same mode and stops once no single ±0.5 px
/// move improves the objective.
pub fn iterative_circle_fit(mask: &BinaryMask, mode: InitMode) -> Result<Circle> {
    let start = match mode {
        InitMode::Inscribed => inscribed_circle(mask)?,
        InitMode::Circumscribed => circumscribed_circle(mask)?,
    };
    let (w, h) = mask.dims();
    let max_radius = ((w * w + h * h) as f64).sqrt();
    let cost = |c: &Circle| -> Option<usize> {
        let raster = c.raster(w, h);
        let feasible = match mode {
            InitMode::Inscribed => raster.is_subset_of(mask),
            InitMode::Circumscribed => mask.is_subset_of(&raster),
        };
        feasible.then(|| {
            raster
                .bits()
                .iter()
                .zip(mask.bits())
                .filter(|(a, b)| a != b)
                .count()
        })
    };

    let mut best = start;
    let mut best_cost = cost(&best).ok_or(Error::InvalidParameter(
        "exact initial circle violates the fit constraint".into(),
    ))?;
    const STEP: f64 = 0.5;
    loop {
        let mut improved = false;
        for axis in 0..3 {
            for delta in [-STEP, STEP] {
                let mut cand = best;
                match axis {
                    0 => cand.center.u += delta,
                    1 => cand.center.v += delta,
                    _ => cand.radius += delta,
                }
                if cand.radius < 0.5 || cand.radius > max_radius {
                    continue;
                }
                if cand.center.u < 0.0
                    || cand.center.v < 0.0
                    || cand.center.u > (w - 1) as f64
                    || cand.center.v > (h - 1) as f64
                {
                    continue;
                }
                if let Some(c) = cost(&cand) {
                    if c < best_cost {
                        best = cand;
                        best_cost = c;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            return Ok(best);
        }
    }
}

/// `nodes` points evenly spaced on the circle, clamped to the frame.
pub fn circle_to_contour(circle: &Circle, nodes: usize, width: usize, height: usize) -> Result<Contour> {
    circle.to_contour(nodes, width, height)
}

/// The exact circle for `mode`.
pub fn init_circle(mask: &BinaryMask, mode: InitMode) -> Result<Circle> {
    match mode {
        InitMode::Inscribed => inscribed_circle(mask),
        InitMode::Circumscribed => circumscribed_circle(mask),
    }
}
