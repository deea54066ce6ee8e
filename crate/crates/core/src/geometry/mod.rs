//! Plan-view geometry: points, polylines, polygons and the 2.5D scene model.
//!
//! Heights are carried on obstacles and corridors but every occlusion test is
//! done in plan; walls and obstacles block sight regardless of height.

mod clip;
mod path;
mod ray;
mod region;
mod transform;

pub use clip::{clip_half_plane, point_segment_distance, segment_polygon_distance, segments_intersect};
pub use path::{segment_path, NavPath, PathSegment, Segmentation, SegmentSpan};
pub use ray::{line_of_sight, ray_cast, Occluders, RayHit};
pub use region::RegionSet;
pub use transform::{Axis, RigidTransform};

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Coincidence tolerance in meters.
pub const COINCIDENCE_EPS: f64 = 1e-9;
/// Tolerance used when comparing metric values.
pub const METRIC_EPS: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    pub fn normalized(self) -> Option<Point2> {
        let n = self.norm();
        (n > COINCIDENCE_EPS).then(|| Point2::new(self.x / n, self.y / n))
    }

    /// Counterclockwise perpendicular.
    pub fn perp(self) -> Point2 {
        Point2::new(-self.y, self.x)
    }

    pub fn lerp(self, other: Point2, t: f64) -> Point2 {
        Point2::new(self.x + (other.x - self.x) * t, self.y + (other.y - self.y) * t)
    }

    pub fn midpoint(self, other: Point2) -> Point2 {
        self.lerp(other, 0.5)
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, rhs: f64) -> Point2 {
        Point2::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

/// Ordered open polyline with at least two vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point2>", into = "Vec<Point2>")]
pub struct Polyline {
    vertices: Vec<Point2>,
}

impl Polyline {
    pub fn new(vertices: Vec<Point2>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::DegenerateGeometry(format!(
                "polyline needs at least 2 vertices, got {}",
                vertices.len()
            )));
        }
        if let Some(p) = vertices.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidGeometry(format!("non-finite vertex ({}, {})", p.x, p.y)));
        }
        for (i, w) in vertices.windows(2).enumerate() {
            if w[0].distance(w[1]) <= COINCIDENCE_EPS {
                return Err(Error::DegenerateGeometry(format!(
                    "polyline vertices {i} and {} coincide",
                    i + 1
                )));
            }
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn first(&self) -> Point2 {
        self.vertices[0]
    }

    pub fn last(&self) -> Point2 {
        self.vertices[self.vertices.len() - 1]
    }

    pub fn length(&self) -> f64 {
        self.vertices.windows(2).map(|w| w[0].distance(w[1])).sum()
    }

    /// Cumulative distance from the first vertex to each vertex.
    pub fn chainages(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.vertices.len());
        let mut acc = 0.0;
        out.push(0.0);
        for w in self.vertices.windows(2) {
            acc += w[0].distance(w[1]);
            out.push(acc);
        }
        out
    }

    /// Point at the given distance along the line, clamped to its ends.
    pub fn point_at(&self, chainage: f64) -> Point2 {
        let mut remaining = chainage.max(0.0);
        for w in self.vertices.windows(2) {
            let len = w[0].distance(w[1]);
            if remaining <= len {
                return w[0].lerp(w[1], remaining / len);
            }
            remaining -= len;
        }
        self.last()
    }

    pub(crate) fn with_vertex(&self, index: usize, p: Point2) -> Result<Polyline> {
        let mut v = self.vertices.clone();
        v[index] = p;
        Polyline::new(v)
    }
}

impl TryFrom<Vec<Point2>> for Polyline {
    type Error = Error;
    fn try_from(v: Vec<Point2>) -> Result<Self> {
        Polyline::new(v)
    }
}

impl From<Polyline> for Vec<Point2> {
    fn from(p: Polyline) -> Self {
        p.vertices
    }
}

/// Shoelace area magnitude of a raw ring.
pub fn polygon_area(ring: &[Point2]) -> Result<f64> {
    let distinct = distinct_vertices(ring);
    if distinct.len() < 3 {
        return Err(Error::DegenerateGeometry(format!(
            "ring has {} distinct vertices",
            distinct.len()
        )));
    }
    Ok(signed_area(&distinct).abs())
}

pub(crate) fn signed_area(ring: &[Point2]) -> f64 {
    let n = ring.len();
    let mut acc = 0.0;
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        acc += a.cross(b);
    }
    acc * 0.5
}

fn distinct_vertices(ring: &[Point2]) -> Vec<Point2> {
    let mut out: Vec<Point2> = Vec::with_capacity(ring.len());
    for &p in ring {
        if out.last().is_none_or(|q| q.distance(p) > COINCIDENCE_EPS) {
            out.push(p);
        }
    }
    while out.len() > 1 && out[0].distance(out[out.len() - 1]) <= COINCIDENCE_EPS {
        out.pop();
    }
    out
}

/// Simple polygon, stored counterclockwise, closed implicitly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point2>", into = "Vec<Point2>")]
pub struct Polygon {
    ring: Vec<Point2>,
}

impl Polygon {
    pub fn new(ring: Vec<Point2>) -> Result<Self> {
        if let Some(p) = ring.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidGeometry(format!("non-finite vertex ({}, {})", p.x, p.y)));
        }
        let mut ring = distinct_vertices(&ring);
        if ring.len() < 3 {
            return Err(Error::DegenerateGeometry(format!(
                "polygon has {} distinct vertices",
                ring.len()
            )));
        }
        let area = signed_area(&ring);
        if area.abs() <= COINCIDENCE_EPS * COINCIDENCE_EPS {
            return Err(Error::DegenerateGeometry("polygon has zero area".into()));
        }
        if let Some((i, j)) = first_self_intersection(&ring) {
            return Err(Error::InvalidGeometry(format!(
                "polygon is self-intersecting (edges {i} and {j})"
            )));
        }
        if area < 0.0 {
            ring.reverse();
        }
        Ok(Self { ring })
    }

    /// Builds a polygon from a ring already known to be simple and
    /// counterclockwise (e.g. the image of a valid polygon under a rotation).
    pub(crate) fn from_ring_unchecked(ring: Vec<Point2>) -> Self {
        debug_assert!(signed_area(&ring) > 0.0);
        Self { ring }
    }

    pub fn rectangle(min: Point2, max: Point2) -> Result<Self> {
        Polygon::new(vec![
            min,
            Point2::new(max.x, min.y),
            max,
            Point2::new(min.x, max.y),
        ])
    }

    /// Axis-aligned square centred at `center`.
    pub fn square(center: Point2, side: f64) -> Result<Self> {
        let h = side * 0.5;
        Polygon::rectangle(
            Point2::new(center.x - h, center.y - h),
            Point2::new(center.x + h, center.y + h),
        )
    }

    /// Rectangle of the given width centred on the segment a-b.
    pub fn band(a: Point2, b: Point2, width: f64) -> Result<Self> {
        let dir = (b - a)
            .normalized()
            .ok_or_else(|| Error::DegenerateGeometry("band axis has zero length".into()))?;
        let off = dir.perp() * (width * 0.5);
        Polygon::new(vec![a - off, b - off, b + off, a + off])
    }

    pub fn ring(&self) -> &[Point2] {
        &self.ring
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.ring)
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.ring.len();
        (0..n).map(move |i| (self.ring[i], self.ring[(i + 1) % n]))
    }

    /// Area centroid.
    pub fn centroid(&self) -> Point2 {
        let n = self.ring.len();
        let origin = self.ring[0];
        let (mut cx, mut cy, mut a2) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let p = self.ring[i] - origin;
            let q = self.ring[(i + 1) % n] - origin;
            let c = p.cross(q);
            a2 += c;
            cx += (p.x + q.x) * c;
            cy += (p.y + q.y) * c;
        }
        Point2::new(origin.x + cx / (3.0 * a2), origin.y + cy / (3.0 * a2))
    }

    pub fn bbox(&self) -> Rect {
        Rect::enclosing(self.ring.iter().copied())
    }

    /// Even-odd point containment; points on the boundary may go either way.
    pub fn contains(&self, p: Point2) -> bool {
        let mut inside = false;
        let n = self.ring.len();
        let mut j = n - 1;
        for i in 0..n {
            let (a, b) = (self.ring[i], self.ring[j]);
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }

    pub fn translated(&self, d: Point2) -> Polygon {
        Polygon::from_ring_unchecked(self.ring.iter().map(|&p| p + d).collect())
    }

    /// Polygon scaled about `center` (factor > 0).
    pub fn scaled_about(&self, center: Point2, factor: f64) -> Polygon {
        Polygon::from_ring_unchecked(
            self.ring.iter().map(|&p| center + (p - center) * factor).collect(),
        )
    }
}

impl TryFrom<Vec<Point2>> for Polygon {
    type Error = Error;
    fn try_from(v: Vec<Point2>) -> Result<Self> {
        Polygon::new(v)
    }
}

impl From<Polygon> for Vec<Point2> {
    fn from(p: Polygon) -> Self {
        p.ring
    }
}

fn first_self_intersection(ring: &[Point2]) -> Option<(usize, usize)> {
    let n = ring.len();
    for i in 0..n {
        let (a, b) = (ring[i], ring[(i + 1) % n]);
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            let (c, d) = (ring[j], ring[(j + 1) % n]);
            if adjacent {
                // Adjacent edges share a vertex; they only conflict if they fold back.
                let shared = if j == i + 1 { b } else { a };
                let (u, v) = if j == i + 1 { (a - shared, d - shared) } else { (b - shared, c - shared) };
                if u.cross(v).abs() <= COINCIDENCE_EPS * u.norm() * v.norm() && u.dot(v) > 0.0 {
                    return Some((i, j));
                }
                continue;
            }
            if segments_intersect(a, b, c, d, COINCIDENCE_EPS) {
                return Some((i, j));
            }
        }
    }
    None
}

/// Axis-aligned rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Point2,
    pub max: Point2,
}

impl Rect {
    pub fn new(min: Point2, max: Point2) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) || max.x <= min.x || max.y <= min.y {
            return Err(Error::InvalidGeometry(format!(
                "bounds must have positive extent, got ({}, {})-({}, {})",
                min.x, min.y, max.x, max.y
            )));
        }
        Ok(Self { min, max })
    }

    pub fn enclosing(points: impl IntoIterator<Item = Point2>) -> Rect {
        let mut min = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        Rect { min, max }
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.min.x - COINCIDENCE_EPS
            && p.x <= self.max.x + COINCIDENCE_EPS
            && p.y >= self.min.y - COINCIDENCE_EPS
            && p.y <= self.max.y + COINCIDENCE_EPS
    }

    pub fn overlaps(&self, other: &Rect) -> bool {
        self.min.x <= other.max.x
            && other.min.x <= self.max.x
            && self.min.y <= other.max.y
            && other.min.y <= self.max.y
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn corners(&self) -> [Point2; 4] {
        [
            self.min,
            Point2::new(self.max.x, self.min.y),
            self.max,
            Point2::new(self.min.x, self.max.y),
        ]
    }
}

/// An occupying 3D element: footprint extruded to `height`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub id: String,
    pub footprint: Polygon,
    pub height: f64,
    #[serde(default)]
    pub tag: String,
    #[serde(default = "default_true")]
    pub movable: bool,
}

fn default_true() -> bool {
    true
}

impl Obstacle {
    pub fn new(id: impl Into<String>, footprint: Polygon, height: f64) -> Result<Self> {
        if !(height.is_finite() && height > 0.0) {
            return Err(Error::InvalidGeometry(format!("obstacle height must be > 0, got {height}")));
        }
        Ok(Self { id: id.into(), footprint, height, tag: String::new(), movable: true })
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.tag = tag.into();
        self
    }

    pub fn immovable(mut self) -> Self {
        self.movable = false;
        self
    }
}

/// Opaque, non-walkable partition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Wall {
    pub id: String,
    pub footprint: Polygon,
}

impl Wall {
    pub fn new(id: impl Into<String>, footprint: Polygon) -> Self {
        Self { id: id.into(), footprint }
    }
}

/// Corridor cross-section attached to a stretch of the navigation path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorridorSegment {
    pub id: String,
    pub axis: [Point2; 2],
    pub width: f64,
    pub height: f64,
}

impl CorridorSegment {
    pub fn new(id: impl Into<String>, a: Point2, b: Point2, width: f64, height: f64) -> Result<Self> {
        let c = Self { id: id.into(), axis: [a, b], width, height };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let [a, b] = self.axis;
        if !(a.is_finite() && b.is_finite()) || a.distance(b) <= COINCIDENCE_EPS {
            return Err(Error::DegenerateGeometry(format!("corridor `{}` has a zero-length axis", self.id)));
        }
        if !(self.width.is_finite() && self.width > 0.0 && self.height.is_finite() && self.height > 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "corridor `{}` needs positive width and height",
                self.id
            )));
        }
        Ok(())
    }

    pub fn length(&self) -> f64 {
        self.axis[0].distance(self.axis[1])
    }

    pub fn distance_to(&self, p: Point2) -> f64 {
        point_segment_distance(p, self.axis[0], self.axis[1])
    }
}

/// The morphology under analysis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub bounds: Rect,
    #[serde(default)]
    pub walls: Vec<Wall>,
    #[serde(default)]
    pub obstacles: Vec<Obstacle>,
    #[serde(default)]
    pub corridors: Vec<CorridorSegment>,
}

impl Scene {
    pub fn new(bounds: Rect) -> Self {
        Self { bounds, walls: Vec::new(), obstacles: Vec::new(), corridors: Vec::new() }
    }

    /// Adds a wall with a generated id.
    pub fn with_wall(mut self, footprint: Polygon) -> Self {
        let id = format!("wall-{}", self.walls.len());
        self.walls.push(Wall::new(id, footprint));
        self
    }

    pub fn with_obstacle(mut self, obstacle: Obstacle) -> Self {
        self.obstacles.push(obstacle);
        self
    }

    pub fn with_corridor(mut self, corridor: CorridorSegment) -> Self {
        self.corridors.push(corridor);
        self
    }

    pub fn obstacle_index(&self, id: &str) -> Option<usize> {
        self.obstacles.iter().position(|o| o.id == id)
    }

    pub fn wall_index(&self, id: &str) -> Option<usize> {
        self.walls.iter().position(|w| w.id == id)
    }

    pub fn corridor_index(&self, id: &str) -> Option<usize> {
        self.corridors.iter().position(|c| c.id == id)
    }

    /// Checks that all geometry lies within the bounds and ids are unique.
    pub fn validate(&self) -> Result<()> {
        let check = |what: String, p: Point2| -> Result<()> {
            if self.bounds.contains(p) {
                Ok(())
            } else {
                Err(Error::InvalidGeometry(format!("{what} has a vertex outside the bounds at ({}, {})", p.x, p.y)))
            }
        };
        for w in &self.walls {
            for &p in w.footprint.ring() {
                check(format!("wall `{}`", w.id), p)?;
            }
        }
        for o in &self.obstacles {
            if !(o.height.is_finite() && o.height > 0.0) {
                return Err(Error::InvalidGeometry(format!("obstacle `{}` needs a positive height", o.id)));
            }
            for &p in o.footprint.ring() {
                check(format!("obstacle `{}`", o.id), p)?;
            }
        }
        for c in &self.corridors {
            c.validate()?;
            for p in c.axis {
                check(format!("corridor `{}`", c.id), p)?;
            }
        }
        let mut ids: Vec<&str> = self.obstacles.iter().map(|o| o.id.as_str()).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidGeometry(format!("duplicate obstacle id `{}`", w[0])));
        }
        let mut wids: Vec<&str> = self.walls.iter().map(|w| w.id.as_str()).collect();
        wids.sort_unstable();
        if let Some(w) = wids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidGeometry(format!("duplicate wall id `{}`", w[0])));
        }
        let mut cids: Vec<&str> = self.corridors.iter().map(|c| c.id.as_str()).collect();
        cids.sort_unstable();
        if let Some(w) = cids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidGeometry(format!("duplicate corridor id `{}`", w[0])));
        }
        Ok(())
    }
}
