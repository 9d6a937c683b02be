//! Active contours driven by distance-transform force fields.
//!
//! A binary mask is turned into a Euclidean distance transform, from which
//! either the distance vector flow (`-∇DT`) or the locally controlled
//! variant (`-DT ∇DT`) is derived. A closed snake initialized from a circle
//! fitted to the mask then evolves under that force, its internal
//! continuity and curvature terms, and a per-pixel balloon force.

pub mod distance;
pub mod error;
pub mod field;
pub mod flow;
pub mod geometry;
pub mod init;
pub mod io;
pub mod learn;
pub mod metrics;
pub mod pipeline;
pub mod shapes;
pub mod snake;

pub use distance::{edt_brute, edt_exact, interior_distance, mask_to_dt, DistanceField};
pub use error::{Error, Result};
pub use field::{BinaryMask, Pixel, ScalarField, VectorField};
pub use flow::{clip_field, dvf, energy_gradient_field, lcdvf, FieldKind, ForceField, DEFAULT_CLIP_NORM};
pub use geometry::{rasterize, signed_area, Circle, Contour, Point, Raster};
pub use init::{
    circumscribed_circle, convex_hull, init_circle, inscribed_circle, iterative_circle_fit,
    minimal_enclosing_circle, InitMode,
};
pub use learn::{
    fit_parameters, subgrad_alpha, subgrad_beta, subgrad_kappa, subgrad_mask, FitReport, SubgradientMaps,
};
pub use metrics::{boundf, dice, evaluate, iou, MetricsReport, BOUNDF_THRESHOLDS};
pub use pipeline::{segment, FieldSource, InitSpec, Profile, Segmentation};
pub use snake::{
    assemble_internal_system, balloon_force, energy_eval, evolve, evolve_step, Energy, EvolutionTrace,
    InternalSystem, ParameterSet, SnakeConfig, TraceEntry,
};
