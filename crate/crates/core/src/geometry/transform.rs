use serde::{Deserialize, Serialize};

use super::{CorridorSegment, Obstacle, Point2, Polygon, Polyline, Rect, Scene, Wall};
use crate::error::Result;

/// Infinite line used as a reflection axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub point: Point2,
    pub direction: Point2,
}

impl Axis {
    /// Returns `None` when `direction` has zero length.
    pub fn new(point: Point2, direction: Point2) -> Option<Self> {
        direction.normalized().map(|direction| Self { point, direction })
    }

    pub fn reflect(&self, p: Point2) -> Point2 {
        let d = p - self.point;
        let along = self.direction * d.dot(self.direction);
        self.point + along * 2.0 - d
    }

    pub fn signed_distance(&self, p: Point2) -> f64 {
        self.direction.cross(p - self.point)
    }

    pub fn project(&self, p: Point2) -> Point2 {
        self.point + self.direction * (p - self.point).dot(self.direction)
    }

    pub fn reflect_polygon(&self, poly: &Polygon) -> Polygon {
        let mut ring: Vec<Point2> = poly.ring().iter().map(|&p| self.reflect(p)).collect();
        ring.reverse();
        Polygon::from_ring_unchecked(ring)
    }
}

/// Rotation (optionally preceded by a mirror about the x axis) plus translation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RigidTransform {
    pub cos: f64,
    pub sin: f64,
    pub translation: Point2,
    pub mirror: bool,
}

impl RigidTransform {
    pub fn new(angle_rad: f64, translation: Point2, mirror: bool) -> Self {
        Self { cos: angle_rad.cos(), sin: angle_rad.sin(), translation, mirror }
    }

    pub fn apply(&self, p: Point2) -> Point2 {
        let y = if self.mirror { -p.y } else { p.y };
        Point2::new(
            self.cos * p.x - self.sin * y + self.translation.x,
            self.sin * p.x + self.cos * y + self.translation.y,
        )
    }

    pub fn apply_vector(&self, v: Point2) -> Point2 {
        let y = if self.mirror { -v.y } else { v.y };
        Point2::new(self.cos * v.x - self.sin * y, self.sin * v.x + self.cos * y)
    }

    pub fn apply_polygon(&self, poly: &Polygon) -> Polygon {
        let mut ring: Vec<Point2> = poly.ring().iter().map(|&p| self.apply(p)).collect();
        if self.mirror {
            ring.reverse();
        }
        Polygon::from_ring_unchecked(ring)
    }

    pub fn apply_polyline(&self, line: &Polyline) -> Result<Polyline> {
        Polyline::new(line.vertices().iter().map(|&p| self.apply(p)).collect())
    }

    /// Transforms a scene; the bounds become the axis-aligned box enclosing
    /// the transformed bounds.
    pub fn apply_scene(&self, scene: &Scene) -> Scene {
        let bounds = Rect::enclosing(scene.bounds.corners().into_iter().map(|p| self.apply(p)));
        Scene {
            bounds,
            walls: scene.walls.iter().map(|w| Wall::new(w.id.clone(), self.apply_polygon(&w.footprint))).collect(),
            obstacles: scene
                .obstacles
                .iter()
                .map(|o| Obstacle { footprint: self.apply_polygon(&o.footprint), ..o.clone() })
                .collect(),
            corridors: scene
                .corridors
                .iter()
                .map(|c| CorridorSegment { axis: [self.apply(c.axis[0]), self.apply(c.axis[1])], ..c.clone() })
                .collect(),
        }
    }
}
