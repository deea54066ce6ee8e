use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{NavPath, Occluders, Point2, Scene};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VisibilityMode {
    /// Fraction of vantage points that see the path's end vertex.
    #[default]
    Endpoint,
    /// Fraction of (vantage, downstream vantage) pairs with a clear sight line.
    RemainingPath,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VisibilityMeasure {
    pub visible_fraction: f64,
    pub per_segment_fractions: Vec<f64>,
    /// Sight tests contributed by each segment (weights of the mean).
    pub per_segment_samples: Vec<usize>,
}

/// Vantage points at the midpoints of `ceil(length / spacing)` equal
/// intervals along the path, with their chainages.
pub fn vantage_points(path: &NavPath, spacing: f64) -> Vec<(f64, Point2)> {
    let length = path.line.length();
    let n = ((length / spacing) - 1e-9).ceil().max(1.0) as usize;
    let step = length / n as f64;
    (0..n)
        .map(|k| {
            let s = (k as f64 + 0.5) * step;
            (s, path.line.point_at(s))
        })
        .collect()
}

pub fn visibility_metric(scene: &Scene, path: &NavPath, sample_spacing: f64, mode: VisibilityMode) -> Result<VisibilityMeasure> {
    if !(sample_spacing.is_finite() && sample_spacing > 0.0) {
        return Err(Error::InvalidConfig(format!("sample spacing must be > 0, got {sample_spacing}")));
    }
    if path.line.length() <= 0.0 || path.segments.is_empty() {
        return Err(Error::DegenerateGeometry("empty path".into()));
    }
    let occ = Occluders::from_scene(scene);
    let samples = vantage_points(path, sample_spacing);
    for &(_, p) in &samples {
        if !occ.bounds().contains(p) {
            return Err(Error::OutOfBounds { x: p.x, y: p.y });
        }
    }
    let end = path.line.last();
    let nseg = path.segments.len();
    let mut clear = vec![0usize; nseg];
    let mut total = vec![0usize; nseg];
    for (i, &(s, p)) in samples.iter().enumerate() {
        let seg = path.segment_at(s);
        match mode {
            VisibilityMode::Endpoint => {
                total[seg] += 1;
                clear[seg] += usize::from(occ.clear(p, end));
            }
            VisibilityMode::RemainingPath => {
                for &(_, q) in &samples[i + 1..] {
                    total[seg] += 1;
                    clear[seg] += usize::from(occ.clear(p, q));
                }
            }
        }
    }
    let all: usize = total.iter().sum();
    let visible_fraction = if all == 0 { 1.0 } else { clear.iter().sum::<usize>() as f64 / all as f64 };
    let per_segment_fractions = clear
        .iter()
        .zip(&total)
        .map(|(&c, &t)| if t == 0 { 1.0 } else { c as f64 / t as f64 })
        .collect();
    Ok(VisibilityMeasure { visible_fraction, per_segment_fractions, per_segment_samples: total })
}
