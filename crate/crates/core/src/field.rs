//! Dense row-major grids: real-valued scalar maps, 2-vector maps and binary
//! masks, plus the sampling and differencing used on them.
//!
//! Coordinates are `(u, v)` = (column, row) with pixel centers at integer
//! positions and the origin at the top-left pixel.

use crate::error::{Error, Result};
use crate::geometry::Point;

/// Integer pixel coordinate, `u` = column, `v` = row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pixel {
    pub u: usize,
    pub v: usize,
}

impl Pixel {
    pub fn new(u: usize, v: usize) -> Self {
        Pixel { u, v }
    }

    pub fn to_point(self) -> Point {
        Point::new(self.u as f64, self.v as f64)
    }
}

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidDimensions {
            width,
            height,
            reason: "width and height must be at least 1",
        });
    }
    Ok(())
}

/// A `width x height` map of finite reals.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        check_dims(width, height)?;
        if values.len() != width * height {
            return Err(Error::InvalidDimensions {
                width,
                height,
                reason: "value count does not match width * height",
            });
        }
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("scalar field value"));
        }
        Ok(ScalarField {
            width,
            height,
            values,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        check_dims(width, height)?;
        if !value.is_finite() {
            return Err(Error::NonFinite("fill value"));
        }
        Ok(ScalarField {
            width,
            height,
            values: vec![value; width * height],
        })
    }

    /// Builds a field by evaluating `f(u, v)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        check_dims(width, height)?;
        let mut values = Vec::with_capacity(width * height);
        for v in 0..height {
            for u in 0..width {
                values.push(f(u, v));
            }
        }
        ScalarField::new(width, height, values)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.values[v * self.width + u]
    }

    #[inline]
    pub fn set(&mut self, u: usize, v: usize, value: f64) {
        debug_assert!(value.is_finite());
        self.values[v * self.width + u] = value;
    }

    /// Applies `f` to every value. The result must stay finite.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<ScalarField> {
        ScalarField::new(self.width, self.height, self.values.iter().map(|&x| f(x)).collect())
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Errors with [`Error::DimensionMismatch`] unless `dims` equals this frame.
    pub fn ensure_dims(&self, dims: (usize, usize)) -> Result<()> {
        if self.dims() != dims {
            return Err(Error::mismatch(dims, self.dims()));
        }
        Ok(())
    }

    /// Bilinear interpolation of the four pixels surrounding `point`.
    ///
    /// Points outside `[0, width-1] x [0, height-1]` are clamped onto the
    /// frame; a non-finite point is reported as corrupted contour state.
    pub fn bilinear_sample(&self, point: Point) -> Result<f64> {
        if !point.is_finite() {
            return Err(Error::NonFinite("sample point"));
        }
        let u = point.u.clamp(0.0, (self.width - 1) as f64);
        let v = point.v.clamp(0.0, (self.height - 1) as f64);
        let u0 = u.floor() as usize;
        let v0 = v.floor() as usize;
        let u1 = (u0 + 1).min(self.width - 1);
        let v1 = (v0 + 1).min(self.height - 1);
        let tu = u - u0 as f64;
        let tv = v - v0 as f64;
        let top = self.get(u0, v0) * (1.0 - tu) + self.get(u1, v0) * tu;
        let bottom = self.get(u0, v1) * (1.0 - tu) + self.get(u1, v1) * tu;
        Ok(top * (1.0 - tv) + bottom * tv)
    }

    /// Per-axis central differences in the interior, one-sided differences
    /// on the border rows and columns.
    pub fn central_gradient(&self) -> Result<VectorField> {
        let (w, h) = self.dims();
        if w < 2 || h < 2 {
            return Err(Error::InvalidDimensions {
                width: w,
                height: h,
                reason: "gradient needs at least a 2x2 field",
            });
        }
        let mut du = Vec::with_capacity(w * h);
        let mut dv = Vec::with_capacity(w * h);
        for v in 0..h {
            for u in 0..w {
                let gu = if u == 0 {
                    self.get(1, v) - self.get(0, v)
                } else if u == w - 1 {
                    self.get(w - 1, v) - self.get(w - 2, v)
                } else {
                    (self.get(u + 1, v) - self.get(u - 1, v)) / 2.0
                };
                let gv = if v == 0 {
                    self.get(u, 1) - self.get(u, 0)
                } else if v == h - 1 {
                    self.get(u, h - 1) - self.get(u, h - 2)
                } else {
                    (self.get(u, v + 1) - self.get(u, v - 1)) / 2.0
                };
                du.push(gu);
                dv.push(gv);
            }
        }
        VectorField::new(w, h, du, dv)
    }
}

/// A `width x height` map of 2-vectors stored as two component planes.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    width: usize,
    height: usize,
    u: Vec<f64>,
    v: Vec<f64>,
}

impl VectorField {
    pub fn new(width: usize, height: usize, u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        check_dims(width, height)?;
        if u.len() != width * height || v.len() != width * height {
            return Err(Error::InvalidDimensions {
                width,
                height,
                reason: "component length does not match width * height",
            });
        }
        if u.iter().chain(v.iter()).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("vector field component"));
        }
        Ok(VectorField { width, height, u, v })
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        check_dims(width, height)?;
        Ok(VectorField {
            width,
            height,
            u: vec![0.0; width * height],
            v: vec![0.0; width * height],
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> Point {
        let i = v * self.width + u;
        Point::new(self.u[i], self.v[i])
    }

    #[inline]
    pub fn set(&mut self, u: usize, v: usize, value: Point) {
        let i = v * self.width + u;
        self.u[i] = value.u;
        self.v[i] = value.v;
    }

    pub fn magnitude(&self, u: usize, v: usize) -> f64 {
        self.get(u, v).norm()
    }

    pub fn max_magnitude(&self) -> f64 {
        self.u
            .iter()
            .zip(&self.v)
            .map(|(a, b)| a.hypot(*b))
            .fold(0.0, f64::max)
    }

    /// The `u` component as a scalar field.
    pub fn u_component(&self) -> ScalarField {
        ScalarField {
            width: self.width,
            height: self.height,
            values: self.u.clone(),
        }
    }

    /// The `v` component as a scalar field.
    pub fn v_component(&self) -> ScalarField {
        ScalarField {
            width: self.width,
            height: self.height,
            values: self.v.clone(),
        }
    }

    /// Bilinear interpolation of both components.
    pub fn bilinear_sample(&self, point: Point) -> Result<Point> {
        if !point.is_finite() {
            return Err(Error::NonFinite("sample point"));
        }
        let u = point.u.clamp(0.0, (self.width - 1) as f64);
        let v = point.v.clamp(0.0, (self.height - 1) as f64);
        let u0 = u.floor() as usize;
        let v0 = v.floor() as usize;
        let u1 = (u0 + 1).min(self.width - 1);
        let v1 = (v0 + 1).min(self.height - 1);
        let tu = u - u0 as f64;
        let tv = v - v0 as f64;
        let w00 = (1.0 - tu) * (1.0 - tv);
        let w10 = tu * (1.0 - tv);
        let w01 = (1.0 - tu) * tv;
        let w11 = tu * tv;
        let (i00, i10, i01, i11) = (
            v0 * self.width + u0,
            v0 * self.width + u1,
            v1 * self.width + u0,
            v1 * self.width + u1,
        );
        Ok(Point::new(
            self.u[i00] * w00 + self.u[i10] * w10 + self.u[i01] * w01 + self.u[i11] * w11,
            self.v[i00] * w00 + self.v[i10] * w10 + self.v[i01] * w01 + self.v[i11] * w11,
        ))
    }
}

/// A `width x height` {0,1} map.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        check_dims(width, height)?;
        if bits.len() != width * height {
            return Err(Error::InvalidDimensions {
                width,
                height,
                reason: "bit count does not match width * height",
            });
        }
        Ok(BinaryMask { width, height, bits })
    }

    pub fn empty(width: usize, height: usize) -> Result<Self> {
        BinaryMask::new(width, height, vec![false; width * height])
    }

    pub fn full(width: usize, height: usize) -> Result<Self> {
        BinaryMask::new(width, height, vec![true; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        check_dims(width, height)?;
        let mut bits = Vec::with_capacity(width * height);
        for v in 0..height {
            for u in 0..width {
                bits.push(f(u, v));
            }
        }
        Ok(BinaryMask { width, height, bits })
    }

    /// Thresholds a soft map: `value >= threshold` becomes foreground.
    pub fn threshold(field: &ScalarField, threshold: f64) -> BinaryMask {
        BinaryMask {
            width: field.width(),
            height: field.height(),
            bits: field.values().iter().map(|&x| x >= threshold).collect(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> bool {
        self.bits[v * self.width + u]
    }

    /// Like [`BinaryMask::get`] but treats everything outside the frame as background.
    #[inline]
    pub fn get_signed(&self, u: isize, v: isize) -> bool {
        u >= 0
            && v >= 0
            && (u as usize) < self.width
            && (v as usize) < self.height
            && self.get(u as usize, v as usize)
    }

    #[inline]
    pub fn set(&mut self, u: usize, v: usize, value: bool) {
        self.bits[v * self.width + u] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn foreground(&self) -> impl Iterator<Item = Pixel> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| Pixel::new(i % self.width, i / self.width))
    }

    pub fn to_field(&self) -> ScalarField {
        ScalarField {
            width: self.width,
            height: self.height,
            values: self.bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        }
    }

    /// Errors with [`Error::DimensionMismatch`] unless `dims` equals this frame.
    pub fn ensure_dims(&self, dims: (usize, usize)) -> Result<()> {
        if self.dims() != dims {
            return Err(Error::mismatch(dims, self.dims()));
        }
        Ok(())
    }

    /// `true` when every foreground pixel of `self` is foreground in `other`.
    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.dims() == other.dims() && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    /// Shifts the mask by `(du, dv)`; pixels moved out of the frame are lost.
    pub fn translated(&self, du: isize, dv: isize) -> BinaryMask {
        let mut out = BinaryMask {
            width: self.width,
            height: self.height,
            bits: vec![false; self.bits.len()],
        };
        for p in self.foreground() {
            let nu = p.u as isize + du;
            let nv = p.v as isize + dv;
            if nu >= 0 && nv >= 0 && (nu as usize) < self.width && (nv as usize) < self.height {
                out.set(nu as usize, nv as usize, true);
            }
        }
        out
    }

    /// Foreground pixels with at least one 4-neighbor that is background or
    /// outside the frame, in row-major order.
    pub fn boundary_pixels(&self) -> Vec<Pixel> {
        let mut out = Vec::new();
        for v in 0..self.height {
            for u in 0..self.width {
                if !self.get(u, v) {
                    continue;
                }
                let (iu, iv) = (u as isize, v as isize);
                let interior = self.get_signed(iu - 1, iv)
                    && self.get_signed(iu + 1, iv)
                    && self.get_signed(iu, iv - 1)
                    && self.get_signed(iu, iv + 1);
                if !interior {
                    out.push(Pixel::new(u, v));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bilinear_on_constant_and_linear_fields() {
        let c = ScalarField::filled(7, 5, 3.25).unwrap();
        assert_eq!(c.bilinear_sample(Point::new(2.3, 1.7)).unwrap(), 3.25);

        let ramp = ScalarField::from_fn(10, 10, |u, _| u as f64).unwrap();
        assert!((ramp.bilinear_sample(Point::new(2.5, 7.0)).unwrap() - 2.5).abs() < 1e-15);
    }

    #[test]
    fn bilinear_two_by_two() {
        // [[0,1],[2,3]] in row-major order
        let f = ScalarField::new(2, 2, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        // (0 + 1 + 2 + 3) / 4
        assert!((f.bilinear_sample(Point::new(0.5, 0.5)).unwrap() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn bilinear_rejects_nan() {
        let f = ScalarField::filled(3, 3, 0.0).unwrap();
        assert!(matches!(
            f.bilinear_sample(Point::new(f64::NAN, 1.0)),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn gradient_of_constant_and_affine() {
        let c = ScalarField::filled(6, 4, 9.0).unwrap();
        assert_eq!(c.central_gradient().unwrap().max_magnitude(), 0.0);

        let f = ScalarField::from_fn(8, 8, |u, v| 3.0 * u as f64 + 5.0 * v as f64).unwrap();
        let g = f.central_gradient().unwrap();
        for v in 0..8 {
            for u in 0..8 {
                assert_eq!(g.get(u, v), Point::new(3.0, 5.0));
            }
        }
    }

    #[test]
    fn gradient_needs_two_by_two() {
        let f = ScalarField::filled(1, 5, 0.0).unwrap();
        assert!(matches!(f.central_gradient(), Err(Error::InvalidDimensions { .. })));
    }

    #[test]
    fn gradient_of_point_distance_is_near_unit() {
        let (cu, cv) = (9.0, 7.0);
        let f = ScalarField::from_fn(20, 16, |u, v| ((u as f64 - cu).powi(2) + (v as f64 - cv).powi(2)).sqrt())
            .unwrap();
        let g = f.central_gradient().unwrap();
        for v in 0..16 {
            for u in 0..20 {
                if f.get(u, v) >= 2.0 {
                    let m = g.magnitude(u, v);
                    assert!((0.9..=1.0).contains(&m), "|grad| = {m} at ({u},{v})");
                }
            }
        }
    }

    #[test]
    fn field_rejects_bad_input() {
        assert!(ScalarField::new(0, 3, vec![]).is_err());
        assert!(ScalarField::new(2, 2, vec![0.0; 3]).is_err());
        assert!(ScalarField::new(1, 1, vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn boundary_examples() {
        let full = BinaryMask::full(5, 4).unwrap();
        let b = full.boundary_pixels();
        // frame of a 5x4 image: 2*5 + 2*2
        assert_eq!(b.len(), 14);
        assert!(b.iter().all(|p| p.u == 0 || p.v == 0 || p.u == 4 || p.v == 3));

        let mut single = BinaryMask::empty(5, 5).unwrap();
        single.set(2, 3, true);
        assert_eq!(single.boundary_pixels(), vec![Pixel::new(2, 3)]);

        let square = BinaryMask::from_fn(9, 9, |u, v| (2..7).contains(&u) && (2..7).contains(&v)).unwrap();
        let b = square.boundary_pixels();
        assert_eq!(b.len(), 16);
        assert!(b.iter().all(|p| p.u == 2 || p.u == 6 || p.v == 2 || p.v == 6));

        assert!(BinaryMask::empty(4, 4).unwrap().boundary_pixels().is_empty());
    }
}
