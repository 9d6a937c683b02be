//! Synthetic test masks: disk, rectangle, star, U-shape and a disk-trimmed
//! ellipse, each defined analytically in a frame-relative coordinate system
//! and rasterized by pixel-center containment.

use std::f64::consts::PI;

use crate::field::BinaryMask;
use crate::geometry::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShapeKind {
    Disk,
    Rectangle,
    Star,
    UShape,
    /// An ellipse intersected with a disk, i.e. trimmed by the outer rim of
    /// an annulus. Convex.
    AnnulusCutBlob,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 5] = [
        ShapeKind::Disk,
        ShapeKind::Rectangle,
        ShapeKind::Star,
        ShapeKind::UShape,
        ShapeKind::AnnulusCutBlob,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ShapeKind::Disk => "disk",
            ShapeKind::Rectangle => "rectangle",
            ShapeKind::Star => "star",
            ShapeKind::UShape => "u-shape",
            ShapeKind::AnnulusCutBlob => "annulus-cut-blob",
        }
    }

    pub fn is_concave(self) -> bool {
        matches!(self, ShapeKind::Star | ShapeKind::UShape)
    }

    /// Membership test in normalized coordinates: `(x, y)` in `[-1, 1]^2`
    /// spans the frame, `(0, 0)` is its center.
    fn contains(self, x: f64, y: f64) -> bool {
        match self {
            ShapeKind::Disk => x * x + y * y <= 0.7 * 0.7,
            ShapeKind::Rectangle => x.abs() <= 0.6 && y.abs() <= 0.4,
            ShapeKind::Star => {
                let r = (x * x + y * y).sqrt();
                r <= star_radius(y.atan2(x))
            }
            ShapeKind::UShape => {
                let outer = x.abs() <= 0.65 && y.abs() <= 0.55;
                // notch opening toward the top of the frame (negative y)
                let notch = x.abs() < 0.3 && y < 0.0;
                outer && !notch
            }
            ShapeKind::AnnulusCutBlob => {
                let ellipse = (x / 0.75).powi(2) + (y / 0.5).powi(2) <= 1.0;
                let rim = (x + 0.35).powi(2) + (y - 0.1).powi(2) <= 0.85 * 0.85;
                ellipse && rim
            }
        }
    }
}

const STAR_POINTS: usize = 5;
const STAR_OUTER: f64 = 0.8;
const STAR_INNER: f64 = 0.5;

/// Radius of the straight-edged star boundary in direction `theta`.
fn star_radius(theta: f64) -> f64 {
    // vertices alternate outer/inner every pi/5, first tip pointing up
    let step = PI / STAR_POINTS as f64;
    let phase = theta + PI / 2.0;
    let k = (phase / step).floor();
    let a0 = k * step;
    let (r0, r1) = if (k as i64).rem_euclid(2) == 0 {
        (STAR_OUTER, STAR_INNER)
    } else {
        (STAR_INNER, STAR_OUTER)
    };
    let p0 = Point::new(r0 * a0.cos(), r0 * a0.sin());
    let p1 = Point::new(r1 * (a0 + step).cos(), r1 * (a0 + step).sin());
    // intersect the ray at angle `phase` with segment p0-p1
    let dir = Point::new(phase.cos(), phase.sin());
    let e = p1 - p0;
    let denom = dir.cross(e);
    p0.cross(e) / denom
}

/// A synthetic mask of the given kind in a square `size x size` frame.
pub fn synthetic_mask(kind: ShapeKind, size: usize) -> BinaryMask {
    let half = (size as f64 - 1.0) / 2.0;
    BinaryMask::from_fn(size, size, |u, v| {
        let x = (u as f64 - half) / half;
        let y = (v as f64 - half) / half;
        kind.contains(x, y)
    })
    .expect("size must be at least 1")
}

/// Every shape at 64x64 and 128x128.
pub fn suite() -> Vec<(ShapeKind, usize, BinaryMask)> {
    let mut out = Vec::new();
    for size in [64, 128] {
        for kind in ShapeKind::ALL {
            out.push((kind, size, synthetic_mask(kind, size)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_are_nontrivial() {
        for (kind, size, m) in suite() {
            let frac = m.count() as f64 / (size * size) as f64;
            assert!((0.15..0.7).contains(&frac), "{} {size}: {frac}", kind.name());
            // no foreground on the frame border
            for i in 0..size {
                assert!(!m.get(i, 0) && !m.get(0, i) && !m.get(i, size - 1) && !m.get(size - 1, i));
            }
        }
    }

    #[test]
    fn star_vertices() {
        assert!((star_radius(-PI / 2.0) - STAR_OUTER).abs() < 1e-12);
        assert!((star_radius(-PI / 2.0 + PI / 5.0) - STAR_INNER).abs() < 1e-12);
    }

    #[test]
    fn u_shape_notch_is_open() {
        let m = synthetic_mask(ShapeKind::UShape, 64);
        assert!(!m.get(32, 20));
        assert!(m.get(32, 45));
        assert!(m.get(12, 20));
    }
}
