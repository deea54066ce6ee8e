use serde::{Deserialize, Serialize};

use crate::geometry::NavPath;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationMeasure {
    /// Vertices whose heading change exceeds the segmentation threshold.
    pub turn_count: usize,
    /// Sum of all heading changes, sub-threshold ones included.
    pub accumulated_degrees: f64,
    /// Per-segment share; a turn between two segments is split evenly.
    pub per_segment_degrees: Vec<f64>,
}

pub fn rotation_metric(path: &NavPath) -> RotationMeasure {
    let angles = &path.turn_angles;
    let mut per_segment = vec![0.0; path.segments.len()];
    let last = path.segments.len() - 1;
    for (k, seg) in path.segments.iter().enumerate() {
        for v in seg.span.start..=seg.span.end {
            let a = angles[v];
            let shared = (v == seg.span.start && k > 0) || (v == seg.span.end && k < last);
            per_segment[k] += if shared { 0.5 * a } else { a };
        }
    }
    RotationMeasure {
        turn_count: path.segments.len() - 1,
        accumulated_degrees: angles.iter().sum(),
        per_segment_degrees: per_segment,
    }
}
