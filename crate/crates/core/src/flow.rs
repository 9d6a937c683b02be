//! External force fields derived from a distance map or an arbitrary energy.

use crate::distance::DistanceField;
use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::geometry::Point;

/// Default maximum force magnitude. Forces are scaled by the time step
/// before they move a node, so at the default step of 0.1 this caps a
/// node's external displacement at 2 px per iteration.
pub const DEFAULT_CLIP_NORM: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldKind {
    /// `-grad DT`: unit-magnitude descent toward the nearest boundary.
    Dvf,
    /// `-DT * grad DT`: the distance-scaled flow, vanishing on the boundary.
    Lcdvf,
    /// `-grad E` for a caller-supplied energy map.
    EnergyGradient,
}

impl FieldKind {
    pub fn name(self) -> &'static str {
        match self {
            FieldKind::Dvf => "dvf",
            FieldKind::Lcdvf => "lcdvf",
            FieldKind::EnergyGradient => "energy",
        }
    }
}

/// A clipped force field together with the scalar potential it descends.
///
/// The potential is what the snake energy evaluates as its external term:
/// `DT` for [`FieldKind::Dvf`], `DT^2 / 2` for [`FieldKind::Lcdvf`] and the
/// supplied energy for [`FieldKind::EnergyGradient`].
#[derive(Debug, Clone, PartialEq)]
pub struct ForceField {
    field: VectorField,
    potential: ScalarField,
    kind: FieldKind,
    clip_norm: f64,
}

impl ForceField {
    pub fn field(&self) -> &VectorField {
        &self.field
    }

    pub fn potential(&self) -> &ScalarField {
        &self.potential
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    /// Maximum vector magnitude; `f64::INFINITY` when unclipped.
    pub fn clip_norm(&self) -> f64 {
        self.clip_norm
    }

    pub fn dims(&self) -> (usize, usize) {
        self.field.dims()
    }

    /// Bilinearly interpolated force at a sub-pixel position.
    pub fn sample(&self, p: Point) -> Result<Point> {
        self.field.bilinear_sample(p)
    }
}

fn check_clip(clip_norm: f64) -> Result<()> {
    if clip_norm.is_nan() || clip_norm <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "clip norm must be positive, got {clip_norm}"
        )));
    }
    Ok(())
}

/// Rescales every vector longer than `clip_norm` to that length.
pub fn clip_field(field: &mut VectorField, clip_norm: f64) {
    if clip_norm.is_infinite() {
        return;
    }
    let (w, h) = field.dims();
    for v in 0..h {
        for u in 0..w {
            let f = field.get(u, v);
            let m = f.norm();
            if m > clip_norm {
                field.set(u, v, f * (clip_norm / m));
            }
        }
    }
}

fn negated_gradient(f: &ScalarField, scale: Option<&ScalarField>) -> Result<VectorField> {
    let g = f.central_gradient()?;
    let (w, h) = g.dims();
    let mut out = VectorField::zeros(w, h)?;
    for v in 0..h {
        for u in 0..w {
            let k = scale.map_or(1.0, |s| s.get(u, v));
            out.set(u, v, -(g.get(u, v) * k));
        }
    }
    Ok(out)
}

/// Distance vector flow: `-grad DT`, clipped.
pub fn dvf(dt: &DistanceField, clip_norm: f64) -> Result<ForceField> {
    check_clip(clip_norm)?;
    let mut field = negated_gradient(dt, None)?;
    clip_field(&mut field, clip_norm);
    Ok(ForceField {
        field,
        potential: dt.field().clone(),
        kind: FieldKind::Dvf,
        clip_norm,
    })
}

/// Locally controlled distance vector flow: `-DT * grad DT`, clipped.
///
/// Same direction as [`dvf`], magnitude scaled by the local distance, so the
/// force is exactly zero on boundary pixels.
pub fn lcdvf(dt: &DistanceField, clip_norm: f64) -> Result<ForceField> {
    check_clip(clip_norm)?;
    let mut field = negated_gradient(dt, Some(dt))?;
    clip_field(&mut field, clip_norm);
    Ok(ForceField {
        field,
        potential: dt.map(|d| 0.5 * d * d)?,
        kind: FieldKind::Lcdvf,
        clip_norm,
    })
}

/// Steepest descent of an arbitrary external energy map, clipped.
pub fn energy_gradient_field(energy: &ScalarField, clip_norm: f64) -> Result<ForceField> {
    check_clip(clip_norm)?;
    let mut field = negated_gradient(energy, None)?;
    clip_field(&mut field, clip_norm);
    Ok(ForceField {
        field,
        potential: energy.clone(),
        kind: FieldKind::EnergyGradient,
        clip_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::{edt_exact, mask_to_dt};
    use crate::field::{BinaryMask, Pixel};

    fn point_dt() -> DistanceField {
        edt_exact(&[Pixel::new(5, 5)], 16, 12).unwrap()
    }

    #[test]
    fn dvf_points_at_the_seed() {
        let f = dvf(&point_dt(), f64::INFINITY).unwrap();
        assert_eq!(f.field().get(9, 5), Point::new(-1.0, 0.0));
        assert_eq!(f.kind(), FieldKind::Dvf);
    }

    #[test]
    fn lcdvf_scales_by_distance() {
        let dt = point_dt();
        let f = lcdvf(&dt, f64::INFINITY).unwrap();
        assert_eq!(f.field().get(5, 5), Point::ZERO);
        // DT = 3 on the seed's row
        assert_eq!(f.field().get(8, 5), Point::new(-3.0, 0.0));
        assert_eq!(f.potential().get(8, 5), 4.5);
    }

    #[test]
    fn medial_pixel_has_zero_dvf() {
        // two seeds, the pixel between them sits on the ridge
        let dt = edt_exact(&[Pixel::new(2, 4), Pixel::new(8, 4)], 11, 9).unwrap();
        let f = dvf(&dt, f64::INFINITY).unwrap();
        assert_eq!(f.field().get(5, 4).u, 0.0);
    }

    #[test]
    fn clipping_bounds_magnitude() {
        let m = BinaryMask::from_fn(40, 40, |u, v| (10..30).contains(&u) && (10..30).contains(&v)).unwrap();
        let dt = mask_to_dt(&m).unwrap();
        for clip in [0.5, 2.0, 5.0] {
            let f = lcdvf(&dt, clip).unwrap();
            assert!(f.field().max_magnitude() <= clip + 1e-12);
            let f = dvf(&dt, clip).unwrap();
            assert!(f.field().max_magnitude() <= clip + 1e-12);
        }
    }

    #[test]
    fn energy_field_examples() {
        let c = ScalarField::filled(6, 6, 2.0).unwrap();
        assert_eq!(energy_gradient_field(&c, 1.0).unwrap().field().max_magnitude(), 0.0);

        let ramp = ScalarField::from_fn(6, 6, |u, _| u as f64).unwrap();
        let f = energy_gradient_field(&ramp, 10.0).unwrap();
        for v in 1..5 {
            for u in 1..5 {
                assert_eq!(f.field().get(u, v), Point::new(-1.0, 0.0));
            }
        }
    }

    #[test]
    fn invalid_clip_rejected() {
        assert!(dvf(&point_dt(), 0.0).is_err());
        assert!(lcdvf(&point_dt(), f64::NAN).is_err());
    }
}
