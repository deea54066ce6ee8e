use serde::{Deserialize, Serialize};

use super::edit::Morphology;
use crate::error::{Error, Result};
use crate::geometry::{segment_polygon_distance, Obstacle, Polygon, Polyline, COINCIDENCE_EPS};

/// Hard feasibility envelope for manipulation results.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstraintSet {
    pub endpoints_fixed: bool,
    pub min_width: f64,
    pub max_width: f64,
    pub min_objects: usize,
    pub max_objects: usize,
    /// Obstacles carrying one of these tags are never moved or removed, in
    /// addition to those flagged `movable: false`.
    pub immovable_tags: Vec<String>,
}

impl Default for ConstraintSet {
    fn default() -> Self {
        Self {
            endpoints_fixed: true,
            min_width: 1.2,
            max_width: 12.0,
            min_objects: 0,
            max_objects: 500,
            immovable_tags: Vec::new(),
        }
    }
}

impl ConstraintSet {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InfeasibleRequest(m));
        if !(self.min_width.is_finite() && self.min_width > 0.0) {
            return bad(format!("min_width must be > 0, got {}", self.min_width));
        }
        if !(self.max_width.is_finite() && self.min_width <= self.max_width) {
            return bad(format!("min_width {} exceeds max_width {}", self.min_width, self.max_width));
        }
        if self.min_objects > self.max_objects {
            return bad(format!("min_objects {} exceeds max_objects {}", self.min_objects, self.max_objects));
        }
        Ok(())
    }

    pub fn is_movable(&self, o: &Obstacle) -> bool {
        o.movable && !self.immovable_tags.iter().any(|t| *t == o.tag)
    }
}

/// True when no edge of `line` comes within `clearance` of `poly`.
pub(crate) fn clear_of_path(line: &Polyline, poly: &Polygon, clearance: f64) -> bool {
    let bb = poly.bbox();
    line.vertices().windows(2).all(|w| {
        let (lo_x, hi_x) = (w[0].x.min(w[1].x), w[0].x.max(w[1].x));
        let (lo_y, hi_y) = (w[0].y.min(w[1].y), w[0].y.max(w[1].y));
        let far = hi_x + clearance < bb.min.x
            || lo_x - clearance > bb.max.x
            || hi_y + clearance < bb.min.y
            || lo_y - clearance > bb.max.y;
        far || segment_polygon_distance(w[0], w[1], poly) > clearance
    })
}

fn obstructing(m: &Morphology) -> Vec<String> {
    let mut ids: Vec<String> = m
        .scene
        .walls
        .iter()
        .filter(|w| !clear_of_path(&m.line, &w.footprint, 0.0))
        .map(|w| format!("wall:{}", w.id))
        .chain(
            m.scene
                .obstacles
                .iter()
                .filter(|o| !clear_of_path(&m.line, &o.footprint, 0.0))
                .map(|o| format!("obstacle:{}", o.id)),
        )
        .collect();
    ids.sort();
    ids
}

/// Number of hard-constraint violations of `candidate` relative to the
/// morphology it was derived from. Obstructions of the path that already
/// existed in `original` are not counted.
pub fn violations(original: &Morphology, candidate: &Morphology, cs: &ConstraintSet) -> usize {
    let mut v = 0;
    let (l0, l1) = (&original.line, &candidate.line);
    if cs.endpoints_fixed {
        v += usize::from(l0.first().distance(l1.first()) > COINCIDENCE_EPS);
        v += usize::from(l0.last().distance(l1.last()) > COINCIDENCE_EPS);
    }
    let scene = &candidate.scene;
    v += scene
        .corridors
        .iter()
        .filter(|c| c.width < cs.min_width - 1e-9 || c.width > cs.max_width + 1e-9)
        .count();
    if scene.validate().is_err() {
        v += 1;
    }
    v += l1.vertices().iter().filter(|&&p| !scene.bounds.contains(p)).count();
    let n = scene.obstacles.len();
    v += cs.min_objects.saturating_sub(n) + n.saturating_sub(cs.max_objects);
    for o in original.scene.obstacles.iter().filter(|o| !cs.is_movable(o)) {
        match scene.obstacle_index(&o.id) {
            Some(i) if scene.obstacles[i] == *o => {}
            _ => v += 1,
        }
    }
    let before = obstructing(original);
    v += obstructing(candidate).iter().filter(|id| before.binary_search(id).is_err()).count();
    v
}
