//! End-to-end segmentation of one mask: distance transform, force field,
//! initial circle, evolution, rasterization and metrics.

use std::str::FromStr;

use crate::distance::mask_to_dt;
use crate::error::{Error, Result};
use crate::field::{BinaryMask, ScalarField};
use crate::flow::{dvf, energy_gradient_field, lcdvf, FieldKind, ForceField};
use crate::geometry::{rasterize, Circle, Contour};
use crate::init::{init_circle, iterative_circle_fit, InitMode};
use crate::metrics::{evaluate, MetricsReport};
use crate::snake::{evolve, EvolutionTrace, ParameterSet, SnakeConfig};

pub const DEFAULT_ALPHA: f64 = 0.01;
pub const DEFAULT_BETA: f64 = 0.1;
/// Magnitude of the default balloon map: `+κ` on the mask, `-κ` off it.
pub const DEFAULT_KAPPA: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Profile {
    /// 60 nodes, circumscribed init, 50 iterations.
    Building,
    /// 100 nodes, inscribed init, 10 iterations.
    Medical,
}

impl Profile {
    pub fn name(self) -> &'static str {
        match self {
            Profile::Building => "building",
            Profile::Medical => "medical",
        }
    }

    pub fn init_mode(self) -> InitMode {
        match self {
            Profile::Building => InitMode::Circumscribed,
            Profile::Medical => InitMode::Inscribed,
        }
    }

    pub fn config(self) -> SnakeConfig {
        let (node_count, iterations) = match self {
            Profile::Building => (60, 50),
            Profile::Medical => (100, 10),
        };
        SnakeConfig {
            node_count,
            iterations,
            ..SnakeConfig::default()
        }
    }
}

impl FromStr for Profile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "building" => Ok(Profile::Building),
            "medical" => Ok(Profile::Medical),
            other => Err(Error::InvalidParameter(format!("unknown profile {other:?}"))),
        }
    }
}

/// Where the external force comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldSource {
    Lcdvf,
    Dvf,
    /// Negative gradient of a user-supplied energy map.
    Energy(ScalarField),
}

impl FieldSource {
    pub fn kind(&self) -> FieldKind {
        match self {
            FieldSource::Lcdvf => FieldKind::Lcdvf,
            FieldSource::Dvf => FieldKind::Dvf,
            FieldSource::Energy(_) => FieldKind::EnergyGradient,
        }
    }
}

/// How the initial contour is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitSpec {
    /// Exact inscribed or circumscribed circle of the mask.
    Exact(InitMode),
    /// Coordinate-descent refinement of the exact circle.
    Fitted(InitMode),
    Circle(Circle),
}

pub fn build_force(mask: &BinaryMask, source: &FieldSource, clip_norm: f64) -> Result<ForceField> {
    match source {
        FieldSource::Lcdvf => lcdvf(&mask_to_dt(mask)?, clip_norm),
        FieldSource::Dvf => dvf(&mask_to_dt(mask)?, clip_norm),
        FieldSource::Energy(e) => {
            mask.ensure_dims(e.dims())?;
            energy_gradient_field(e, clip_norm)
        }
    }
}

pub fn initial_circle(mask: &BinaryMask, init: &InitSpec) -> Result<Circle> {
    match *init {
        InitSpec::Exact(mode) => init_circle(mask, mode),
        InitSpec::Fitted(mode) => iterative_circle_fit(mask, mode),
        InitSpec::Circle(c) => Ok(c),
    }
}

pub fn default_params(mask: &BinaryMask) -> Result<ParameterSet> {
    ParameterSet::toward_boundary(mask, DEFAULT_ALPHA, DEFAULT_BETA, DEFAULT_KAPPA)
}

#[derive(Debug, Clone)]
pub struct Segmentation {
    pub initial: Contour,
    pub contour: Contour,
    pub trace: EvolutionTrace,
    pub prediction: BinaryMask,
    /// Present when a ground-truth mask was supplied.
    pub metrics: Option<MetricsReport>,
}

pub fn segment_with_force(
    force: &ForceField,
    initial: Contour,
    params: &ParameterSet,
    config: &SnakeConfig,
    gt: Option<&BinaryMask>,
) -> Result<Segmentation> {
    let (w, h) = force.dims();
    let (contour, trace) = evolve(&initial, force, params, config)?;
    let prediction = rasterize(&contour, w, h)?.mask;
    let metrics = gt.map(|g| evaluate(&prediction, g)).transpose()?;
    Ok(Segmentation {
        initial,
        contour,
        trace,
        prediction,
        metrics,
    })
}

/// Segments `mask` and, when given, scores the result against `gt`.
pub fn segment(
    mask: &BinaryMask,
    source: &FieldSource,
    init: &InitSpec,
    params: &ParameterSet,
    config: &SnakeConfig,
    gt: Option<&BinaryMask>,
) -> Result<Segmentation> {
    config.validate()?;
    let force = build_force(mask, source, config.clip_norm)?;
    let (w, h) = mask.dims();
    let initial = initial_circle(mask, init)?.to_contour(config.node_count, w, h)?;
    segment_with_force(&force, initial, params, config, gt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::{synthetic_mask, ShapeKind};

    #[test]
    fn profiles() {
        assert_eq!(Profile::Building.config().node_count, 60);
        assert_eq!(Profile::Medical.config().iterations, 10);
        assert_eq!("medical".parse::<Profile>().unwrap().init_mode(), InitMode::Inscribed);
        assert!("retina".parse::<Profile>().is_err());
    }

    #[test]
    fn zero_iterations_returns_init_raster() {
        let m = synthetic_mask(ShapeKind::Disk, 64);
        let config = SnakeConfig {
            iterations: 0,
            ..Profile::Building.config()
        };
        let init = InitSpec::Exact(InitMode::Circumscribed);
        let seg = segment(&m, &FieldSource::Lcdvf, &init, &default_params(&m).unwrap(), &config, Some(&m)).unwrap();
        assert_eq!(seg.contour, seg.initial);
        assert_eq!(seg.trace.len(), 1);
        assert_eq!(seg.prediction, rasterize(&seg.initial, 64, 64).unwrap().mask);
    }

    #[test]
    fn disk_converges() {
        let m = synthetic_mask(ShapeKind::Disk, 64);
        let p = Profile::Building;
        let seg = segment(
            &m,
            &FieldSource::Lcdvf,
            &InitSpec::Exact(p.init_mode()),
            &default_params(&m).unwrap(),
            &p.config(),
            Some(&m),
        )
        .unwrap();
        assert!(seg.metrics.unwrap().iou >= 0.95);
    }
}
