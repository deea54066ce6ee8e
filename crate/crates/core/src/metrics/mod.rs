//! Raw values for the six parametrised complexity attributes.

pub mod band;
mod clutter;
mod order;
mod rotation;
mod size;
mod symmetry;
mod visibility;

pub use band::{path_band, segment_band, segment_bands, Band};
pub use clutter::{band_coverage, clutter_with_bands, ClutterMeasure};
pub use order::{
    algebraic_circle, centroids_in, fit_templates, order_of_points, order_with_bands, order_with_cache, OrderCache, OrderMeasure, OrderTemplate,
    TemplateFit, TemplateInstance,
};
pub use rotation::{rotation_metric, RotationMeasure};
pub use size::{size_metric, SizeMeasure};
pub use symmetry::{band_symmetry, path_axes, segment_axes, symmetry_with_bands, SymmetryMeasure};
pub use visibility::{vantage_points, visibility_metric, VisibilityMeasure, VisibilityMode};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{NavPath, Scene};

/// Sampling and fitting parameters shared by the metrics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricParams {
    pub sample_spacing: f64,
    pub visibility_mode: VisibilityMode,
    pub residual_tolerance: f64,
}

impl Default for MetricParams {
    fn default() -> Self {
        Self { sample_spacing: 1.0, visibility_mode: VisibilityMode::Endpoint, residual_tolerance: 0.25 }
    }
}

pub fn symmetry_metric(scene: &Scene, path: &NavPath) -> Result<SymmetryMeasure> {
    let bands = segment_bands(scene, path)?;
    let whole = path_band(&bands);
    Ok(symmetry_with_bands(scene, path, &bands, &whole))
}

pub fn clutter_metric(scene: &Scene, path: &NavPath) -> Result<ClutterMeasure> {
    clutter_with_bands(scene, &segment_bands(scene, path)?)
}

pub fn order_metric(scene: &Scene, path: &NavPath, residual_tolerance: f64) -> Result<OrderMeasure> {
    if !(residual_tolerance.is_finite() && residual_tolerance > 0.0) {
        return Err(Error::InvalidConfig(format!("residual tolerance must be > 0, got {residual_tolerance}")));
    }
    let bands = segment_bands(scene, path)?;
    let whole = path_band(&bands);
    Ok(order_with_bands(scene, &bands, &whole, residual_tolerance))
}

/// All six raw measures for one path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributeProfile {
    pub path_length: f64,
    pub segment_lengths: Vec<f64>,
    pub rotation: RotationMeasure,
    pub size: SizeMeasure,
    pub visibility: VisibilityMeasure,
    pub symmetry: SymmetryMeasure,
    pub clutter: ClutterMeasure,
    pub order: OrderMeasure,
}

pub fn compute_profile(scene: &Scene, path: &NavPath, params: &MetricParams) -> Result<AttributeProfile> {
    compute_profile_cached(scene, path, params, None)
}

/// As [`compute_profile`], reusing order fits from `cache`.
pub fn compute_profile_cached(
    scene: &Scene,
    path: &NavPath,
    params: &MetricParams,
    cache: Option<&OrderCache>,
) -> Result<AttributeProfile> {
    if !(params.residual_tolerance.is_finite() && params.residual_tolerance > 0.0) {
        return Err(Error::InvalidConfig("residual tolerance must be > 0".into()));
    }
    let bands = segment_bands(scene, path)?;
    let whole = path_band(&bands);
    Ok(AttributeProfile {
        path_length: path.line.length(),
        segment_lengths: path.segments.iter().map(|s| s.length()).collect(),
        rotation: rotation_metric(path),
        size: size_metric(scene, path)?,
        visibility: visibility_metric(scene, path, params.sample_spacing, params.visibility_mode)?,
        symmetry: symmetry_with_bands(scene, path, &bands, &whole),
        clutter: clutter_with_bands(scene, &bands)?,
        order: order_with_cache(scene, &bands, &whole, params.residual_tolerance, cache),
    })
}
