//! Sub-pixel points, closed polygonal contours, circles and polygon
//! rasterization.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::field::BinaryMask;

/// Polygons with less absolute signed area than this (px²) are degenerate.
pub const DEGENERATE_AREA: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub u: f64,
    pub v: f64,
}

impl Point {
    pub const ZERO: Point = Point { u: 0.0, v: 0.0 };

    pub const fn new(u: f64, v: f64) -> Self {
        Point { u, v }
    }

    pub fn is_finite(self) -> bool {
        self.u.is_finite() && self.v.is_finite()
    }

    pub fn dot(self, other: Point) -> f64 {
        self.u * other.u + self.v * other.v
    }

    pub fn cross(self, other: Point) -> f64 {
        self.u * other.v - self.v * other.u
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.u.hypot(self.v)
    }

    pub fn distance(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn clamp_to(self, width: usize, height: usize) -> Point {
        Point::new(
            self.u.clamp(0.0, (width - 1) as f64),
            self.v.clamp(0.0, (height - 1) as f64),
        )
    }

    /// Nearest pixel, or `None` when the rounded position is outside the frame.
    pub fn nearest_pixel(self, width: usize, height: usize) -> Option<(usize, usize)> {
        let u = self.u.round();
        let v = self.v.round();
        if u < 0.0 || v < 0.0 || u >= width as f64 || v >= height as f64 {
            return None;
        }
        Some((u as usize, v as usize))
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.u + o.u, self.v + o.v)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.u - o.u, self.v - o.v)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, k: f64) -> Point {
        Point::new(self.u * k, self.v * k)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.u, -self.v)
    }
}

/// Shoelace signed area; positive for the normalized orientation.
pub fn signed_area(nodes: &[Point]) -> f64 {
    let n = nodes.len();
    let mut acc = 0.0;
    for i in 0..n {
        acc += nodes[i].cross(nodes[(i + 1) % n]);
    }
    acc / 2.0
}

/// A closed polygon of `L >= 3` nodes, node `L-1` connecting back to node 0.
///
/// Construction normalizes the orientation to positive signed area, so the
/// outward normal of a node with tangent `t` is `(t.v, -t.u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    nodes: Vec<Point>,
}

impl Contour {
    pub fn new(mut nodes: Vec<Point>) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::TooFewNodes(nodes.len()));
        }
        if nodes.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("contour node"));
        }
        if signed_area(&nodes) < 0.0 {
            nodes.reverse();
        }
        Ok(Contour { nodes })
    }

    /// Builds a contour and clamps every node into the `width x height` frame.
    pub fn new_clamped(nodes: Vec<Point>, width: usize, height: usize) -> Result<Self> {
        if nodes.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("contour node"));
        }
        Contour::new(nodes.into_iter().map(|p| p.clamp_to(width, height)).collect())
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Node `s` with cyclic indexing.
    #[inline]
    pub fn node(&self, s: isize) -> Point {
        let n = self.nodes.len() as isize;
        self.nodes[s.rem_euclid(n) as usize]
    }

    pub fn signed_area(&self) -> f64 {
        signed_area(&self.nodes)
    }

    pub fn is_degenerate(&self) -> bool {
        self.signed_area().abs() < DEGENERATE_AREA
    }

    pub fn perimeter(&self) -> f64 {
        (0..self.len() as isize)
            .map(|s| self.node(s + 1).distance(self.node(s)))
            .sum()
    }

    pub fn centroid(&self) -> Point {
        let n = self.nodes.len() as f64;
        let sum = self.nodes.iter().fold(Point::ZERO, |acc, &p| acc + p);
        sum * (1.0 / n)
    }

    /// Forward differences `y[s+1] - y[s]`.
    pub fn first_differences(&self) -> Vec<Point> {
        (0..self.len() as isize)
            .map(|s| self.node(s + 1) - self.node(s))
            .collect()
    }

    /// Centered second differences `y[s+1] - 2 y[s] + y[s-1]`.
    pub fn second_differences(&self) -> Vec<Point> {
        (0..self.len() as isize)
            .map(|s| self.node(s + 1) - self.node(s) * 2.0 + self.node(s - 1))
            .collect()
    }

    pub fn clamped(&self, width: usize, height: usize) -> Contour {
        Contour {
            nodes: self.nodes.iter().map(|p| p.clamp_to(width, height)).collect(),
        }
    }

    /// Cyclically rotates the node list so that node `shift` comes first.
    pub fn rotated(&self, shift: usize) -> Contour {
        let mut nodes = self.nodes.clone();
        let n = nodes.len();
        nodes.rotate_left(shift % n);
        Contour { nodes }
    }

    pub fn translated(&self, delta: Point) -> Contour {
        Contour {
            nodes: self.nodes.iter().map(|&p| p + delta).collect(),
        }
    }

    /// `count` nodes spaced uniformly by arc length, starting at node 0.
    pub fn resampled(&self, count: usize) -> Result<Contour> {
        if count < 3 {
            return Err(Error::TooFewNodes(count));
        }
        let n = self.len();
        let mut cumulative = Vec::with_capacity(n + 1);
        cumulative.push(0.0);
        for s in 0..n as isize {
            let last = *cumulative.last().unwrap();
            cumulative.push(last + self.node(s + 1).distance(self.node(s)));
        }
        let total = cumulative[n];
        if total <= 0.0 {
            return Contour::new(vec![self.nodes[0]; count]);
        }
        let mut out = Vec::with_capacity(count);
        let mut seg = 0;
        for k in 0..count {
            let target = total * k as f64 / count as f64;
            while seg + 1 < n && cumulative[seg + 1] <= target {
                seg += 1;
            }
            let len = cumulative[seg + 1] - cumulative[seg];
            let t = if len > 0.0 { (target - cumulative[seg]) / len } else { 0.0 };
            let a = self.node(seg as isize);
            let b = self.node(seg as isize + 1);
            out.push(a + (b - a) * t);
        }
        Contour::new(out)
    }
}

/// A circle in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: Point,
    pub radius: f64,
}

impl Circle {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !center.is_finite() || !radius.is_finite() {
            return Err(Error::NonFinite("circle"));
        }
        if radius <= 0.0 {
            return Err(Error::InvalidParameter(format!("circle radius must be positive, got {radius}")));
        }
        Ok(Circle { center, radius })
    }

    /// Pixels whose centers lie strictly inside the circle. Centers within
    /// rounding error of the rim (e.g. radius `sqrt(2)` through a diagonal
    /// neighbor) count as on it.
    pub fn raster(&self, width: usize, height: usize) -> BinaryMask {
        let r2 = self.radius * self.radius * (1.0 - 1e-12);
        BinaryMask::from_fn(width, height, |u, v| {
            (Point::new(u as f64, v as f64) - self.center).norm_sq() < r2
        })
        .expect("dimensions come from an existing frame")
    }

    /// `nodes` points at angles `2 pi s / nodes`, clamped to the frame.
    pub fn to_contour(&self, nodes: usize, width: usize, height: usize) -> Result<Contour> {
        if nodes < 3 {
            return Err(Error::TooFewNodes(nodes));
        }
        let pts = (0..nodes)
            .map(|s| {
                let theta = 2.0 * PI * s as f64 / nodes as f64;
                Point::new(
                    self.center.u + self.radius * theta.cos(),
                    self.center.v + self.radius * theta.sin(),
                )
            })
            .collect();
        Contour::new_clamped(pts, width, height)
    }
}

/// Output of [`rasterize`].
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub mask: BinaryMask,
    /// Set when the polygon's area is below [`DEGENERATE_AREA`]; the mask is then empty.
    pub degenerate: bool,
}

/// Edge endpoints ordered by increasing `v`, so the crossing abscissa does not
/// depend on the polygon's traversal direction.
#[inline]
pub(crate) fn ordered_edge(a: Point, b: Point) -> (Point, Point) {
    if a.v <= b.v {
        (a, b)
    } else {
        (b, a)
    }
}

/// Abscissa where the horizontal line `v = row` crosses the edge, if the edge
/// spans the row under the half-open rule `lo.v <= row < hi.v`.
#[inline]
pub(crate) fn row_crossing(lo: Point, hi: Point, row: f64) -> Option<f64> {
    if lo.v <= row && row < hi.v {
        Some(lo.u + (row - lo.v) * (hi.u - lo.u) / (hi.v - lo.v))
    } else {
        None
    }
}

/// Pixel-center containment with the even-odd rule.
///
/// A pixel center `(i, j)` is inside when an odd number of edges cross row
/// `j` strictly to its right; edges span rows half-open at their lower end.
/// Centers lying on a left or top edge are therefore inside and those on a
/// right or bottom edge outside.
pub fn rasterize(contour: &Contour, width: usize, height: usize) -> Result<Raster> {
    let mut mask = BinaryMask::empty(width, height)?;
    if contour.is_degenerate() {
        return Ok(Raster { mask, degenerate: true });
    }
    let edges: Vec<(Point, Point)> = (0..contour.len() as isize)
        .map(|s| ordered_edge(contour.node(s), contour.node(s + 1)))
        .collect();
    let mut crossings = Vec::with_capacity(edges.len());
    for row in 0..height {
        let y = row as f64;
        crossings.clear();
        crossings.extend(edges.iter().filter_map(|&(lo, hi)| row_crossing(lo, hi, y)));
        if crossings.is_empty() {
            continue;
        }
        crossings.sort_by(f64::total_cmp);
        for span in crossings.chunks_exact(2) {
            // inside iff span[0] <= i < span[1]
            let start = span[0].ceil().max(0.0);
            let end = span[1].ceil().min(width as f64);
            if start >= end {
                continue;
            }
            for u in start as usize..end as usize {
                mask.set(u, row, true);
            }
        }
    }
    Ok(Raster { mask, degenerate: false })
}
