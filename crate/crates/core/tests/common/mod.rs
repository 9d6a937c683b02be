//! Brute-force reference implementations shared by the integration tests.
#![allow(dead_code)]

use lcdvf_core::{BinaryMask, Contour, Pixel, Point, ScalarField};
use rand::Rng;

/// Even-odd pixel-center test evaluated independently for every pixel:
/// count polygon edges crossing row `v` at or left of `u`.
pub fn point_in_polygon(poly: &[Point], u: f64, v: f64) -> bool {
    let n = poly.len();
    let mut inside = false;
    for i in 0..n {
        let (mut a, mut b) = (poly[i], poly[(i + 1) % n]);
        if a.v > b.v {
            std::mem::swap(&mut a, &mut b);
        }
        if !(a.v <= v && v < b.v) {
            continue;
        }
        let x = a.u + (v - a.v) * (b.u - a.u) / (b.v - a.v);
        if x <= u {
            inside = !inside;
        }
    }
    inside
}

pub fn raster_oracle(c: &Contour, w: usize, h: usize) -> BinaryMask {
    BinaryMask::from_fn(w, h, |u, v| point_in_polygon(c.nodes(), u as f64, v as f64)).unwrap()
}

/// Smallest circle over all 2- and 3-point candidates that contains every
/// point. Cubic in the number of points.
pub fn mec_oracle(points: &[Point]) -> (Point, f64) {
    if points.len() == 1 {
        return (points[0], 0.0);
    }
    let tol = 1e-7;
    let covers = |c: Point, r: f64| points.iter().all(|p| p.distance(c) <= r + tol);
    let mut best = (Point::ZERO, f64::INFINITY);
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let c = (points[i] + points[j]) * 0.5;
            let r = points[i].distance(points[j]) / 2.0;
            if r < best.1 && covers(c, r) {
                best = (c, r);
            }
        }
    }
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            for k in j + 1..points.len() {
                let (a, b, c) = (points[i], points[j], points[k]);
                let ab = b - a;
                let ac = c - a;
                let d = 2.0 * ab.cross(ac);
                if d.abs() < 1e-12 {
                    continue;
                }
                let center = a
                    + Point::new(
                        (ac.v * ab.norm_sq() - ab.v * ac.norm_sq()) / d,
                        (ab.u * ac.norm_sq() - ac.u * ab.norm_sq()) / d,
                    );
                let r = center.distance(a);
                if r < best.1 && covers(center, r) {
                    best = (center, r);
                }
            }
        }
    }
    best
}

/// Distance from each of `from` to its nearest pixel in `to`.
pub fn nearest_distances(from: &[Pixel], to: &[Pixel]) -> Vec<f64> {
    from.iter()
        .map(|p| {
            to.iter()
                .map(|q| p.to_point().distance(q.to_point()))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// Boundary F1 at threshold `t` by exhaustive nearest-pixel search.
pub fn boundf_oracle(pred: &BinaryMask, gt: &BinaryMask, t: f64) -> f64 {
    let pb = pred.boundary_pixels();
    let gb = gt.boundary_pixels();
    let precision = nearest_distances(&pb, &gb).iter().filter(|&&d| d <= t).count() as f64 / pb.len() as f64;
    let recall = nearest_distances(&gb, &pb).iter().filter(|&&d| d <= t).count() as f64 / gb.len() as f64;
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Random union of a few ellipses, never touching the frame border.
pub fn random_blob<R: Rng>(rng: &mut R, w: usize, h: usize) -> BinaryMask {
    let count = rng.gen_range(1..=3);
    let blobs: Vec<(f64, f64, f64, f64)> = (0..count)
        .map(|_| {
            let ru = rng.gen_range(2.0..w as f64 / 4.0);
            let rv = rng.gen_range(2.0..h as f64 / 4.0);
            let cu = rng.gen_range(ru + 1.0..w as f64 - ru - 2.0);
            let cv = rng.gen_range(rv + 1.0..h as f64 - rv - 2.0);
            (cu, cv, ru, rv)
        })
        .collect();
    BinaryMask::from_fn(w, h, |u, v| {
        blobs.iter().any(|&(cu, cv, ru, rv)| {
            let x = (u as f64 - cu) / ru;
            let y = (v as f64 - cv) / rv;
            x * x + y * y <= 1.0
        })
    })
    .unwrap()
}

/// Random polygon with vertices anywhere in a slightly enlarged frame; a
/// third of the vertices land on integer or half-integer coordinates to
/// exercise ties with pixel centers.
pub fn random_polygon<R: Rng>(rng: &mut R, w: usize, h: usize) -> Vec<Point> {
    let n = rng.gen_range(3..=24);
    (0..n)
        .map(|_| {
            let mut u = rng.gen_range(-2.0..w as f64 + 2.0);
            let mut v = rng.gen_range(-2.0..h as f64 + 2.0);
            match rng.gen_range(0..3) {
                0 => {
                    u = u.round();
                    v = v.round();
                }
                1 => {
                    u = (u * 2.0).round() / 2.0;
                    v = (v * 2.0).round() / 2.0;
                }
                _ => {}
            }
            Point::new(u, v)
        })
        .collect()
}

/// Random mask with the given foreground probability.
pub fn random_mask<R: Rng>(rng: &mut R, w: usize, h: usize, density: f64) -> BinaryMask {
    BinaryMask::from_fn(w, h, |_, _| rng.gen_bool(density)).unwrap()
}

pub fn max_abs_diff(a: &ScalarField, b: &ScalarField) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
