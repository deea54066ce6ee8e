use super::{Point2, Rect, Scene, COINCIDENCE_EPS};
use crate::error::{Error, Result};

/// Result of a ray cast.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RayHit {
    /// The ray met a wall or obstacle edge.
    Hit(f64),
    /// Nothing in the scene was hit; the distance is to the bounds edge.
    Unbounded(f64),
}

impl RayHit {
    pub fn distance(self) -> f64 {
        match self {
            RayHit::Hit(d) | RayHit::Unbounded(d) => d,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Edge {
    a: Point2,
    b: Point2,
    min: Point2,
    max: Point2,
}

/// Flattened occluding edges of a scene (walls and obstacle footprints).
#[derive(Clone, Debug)]
pub struct Occluders {
    bounds: Rect,
    edges: Vec<Edge>,
}

impl Occluders {
    pub fn from_scene(scene: &Scene) -> Self {
        let mut edges = Vec::new();
        let polys = scene.walls.iter().map(|w| &w.footprint).chain(scene.obstacles.iter().map(|o| &o.footprint));
        for poly in polys {
            for (a, b) in poly.edges() {
                edges.push(Edge {
                    a,
                    b,
                    min: Point2::new(a.x.min(b.x), a.y.min(b.y)),
                    max: Point2::new(a.x.max(b.x), a.y.max(b.y)),
                });
            }
        }
        Self { bounds: scene.bounds, edges }
    }

    pub fn bounds(&self) -> Rect {
        self.bounds
    }

    fn check_inside(&self, p: Point2) -> Result<()> {
        if self.bounds.contains(p) {
            Ok(())
        } else {
            Err(Error::OutOfBounds { x: p.x, y: p.y })
        }
    }

    pub fn ray_cast(&self, origin: Point2, direction: Point2) -> Result<RayHit> {
        self.check_inside(origin)?;
        let dir = direction
            .normalized()
            .ok_or_else(|| Error::DegenerateGeometry("ray direction has zero length".into()))?;
        let exit = bounds_exit(&self.bounds, origin, dir);
        let mut best = f64::INFINITY;
        for e in &self.edges {
            let s = e.b - e.a;
            let denom = dir.cross(s);
            let ao = e.a - origin;
            let sl = s.norm();
            if denom.abs() <= 1e-15 * sl {
                continue;
            }
            let t = ao.cross(s) / denom;
            let u = ao.cross(dir) / denom;
            let eu = COINCIDENCE_EPS / sl;
            if t > COINCIDENCE_EPS && u >= -eu && u <= 1.0 + eu && t < best {
                best = t;
            }
        }
        Ok(if best <= exit { RayHit::Hit(best) } else { RayHit::Unbounded(exit) })
    }

    pub fn line_of_sight(&self, a: Point2, b: Point2) -> Result<bool> {
        self.check_inside(a)?;
        self.check_inside(b)?;
        Ok(self.clear(a, b))
    }

    /// Unchecked line-of-sight test for points already known to be in bounds.
    pub(crate) fn clear(&self, a: Point2, b: Point2) -> bool {
        let r = b - a;
        let len = r.norm();
        if len <= COINCIDENCE_EPS {
            return true;
        }
        let lo = Point2::new(a.x.min(b.x) - COINCIDENCE_EPS, a.y.min(b.y) - COINCIDENCE_EPS);
        let hi = Point2::new(a.x.max(b.x) + COINCIDENCE_EPS, a.y.max(b.y) + COINCIDENCE_EPS);
        let et = COINCIDENCE_EPS / len;
        for e in &self.edges {
            if e.max.x < lo.x || e.min.x > hi.x || e.max.y < lo.y || e.min.y > hi.y {
                continue;
            }
            let s = e.b - e.a;
            let sl = s.norm();
            let denom = r.cross(s);
            let ac = e.a - a;
            if denom.abs() <= 1e-12 * len * sl {
                // Parallel: blocked only when collinear and overlapping the open sight line.
                if ac.cross(r).abs() / len > COINCIDENCE_EPS {
                    continue;
                }
                let t0 = ac.dot(r) / (len * len);
                let t1 = (e.b - a).dot(r) / (len * len);
                let (lo_t, hi_t) = (t0.min(t1), t0.max(t1));
                if hi_t > et && lo_t < 1.0 - et {
                    return false;
                }
                continue;
            }
            let t = ac.cross(s) / denom;
            let u = ac.cross(r) / denom;
            let eu = COINCIDENCE_EPS / sl;
            if t > et && t < 1.0 - et && u >= -eu && u <= 1.0 + eu {
                return false;
            }
        }
        true
    }
}

fn bounds_exit(bounds: &Rect, o: Point2, d: Point2) -> f64 {
    let mut t = f64::INFINITY;
    if d.x > 0.0 {
        t = t.min((bounds.max.x - o.x) / d.x);
    } else if d.x < 0.0 {
        t = t.min((bounds.min.x - o.x) / d.x);
    }
    if d.y > 0.0 {
        t = t.min((bounds.max.y - o.y) / d.y);
    } else if d.y < 0.0 {
        t = t.min((bounds.min.y - o.y) / d.y);
    }
    t.max(0.0)
}

/// Distance from `origin` along `direction` to the nearest wall or obstacle
/// edge, clamped at the bounds edge.
pub fn ray_cast(scene: &Scene, origin: Point2, direction: Point2) -> Result<RayHit> {
    Occluders::from_scene(scene).ray_cast(origin, direction)
}

/// True when the open segment a-b crosses no wall or obstacle edge.
/// Grazing an edge endpoint counts as blocked.
pub fn line_of_sight(scene: &Scene, a: Point2, b: Point2) -> Result<bool> {
    Occluders::from_scene(scene).line_of_sight(a, b)
}
