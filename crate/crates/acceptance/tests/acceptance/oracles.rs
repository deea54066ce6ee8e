//! Brute-force reference implementations used to check the metrics. They
//! share no code with the library beyond plain geometry types.

use vlc_core::geometry::{Axis, Point2, Polygon, Rect, Scene};
use vlc_core::metrics::Band;

/// Crossing-number point-in-polygon test on a raw ring.
pub fn inside(ring: &[Point2], p: Point2) -> bool {
    let mut c = false;
    let n = ring.len();
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (ring[i], ring[j]);
        if (a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x {
            c = !c;
        }
        j = i;
    }
    c
}

fn bbox(ring: &[Point2]) -> (Point2, Point2) {
    let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in ring {
        lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    (lo, hi)
}

struct Shape<'a> {
    ring: &'a [Point2],
    lo: Point2,
    hi: Point2,
}

impl<'a> Shape<'a> {
    fn new(poly: &'a Polygon) -> Self {
        let (lo, hi) = bbox(poly.ring());
        Self { ring: poly.ring(), lo, hi }
    }

    fn contains(&self, p: Point2) -> bool {
        p.x >= self.lo.x && p.x <= self.hi.x && p.y >= self.lo.y && p.y <= self.hi.y && inside(self.ring, p)
    }
}

/// Cell centres of a `pitch` raster over `rect`.
fn cells(rect: (Point2, Point2), pitch: f64) -> impl Iterator<Item = Point2> {
    let (lo, hi) = rect;
    let nx = ((hi.x - lo.x) / pitch).ceil() as usize;
    let ny = ((hi.y - lo.y) / pitch).ceil() as usize;
    (0..ny).flat_map(move |j| {
        (0..nx).map(move |i| Point2::new(lo.x + (i as f64 + 0.5) * pitch, lo.y + (j as f64 + 0.5) * pitch))
    })
}

fn band_rect(band: &Band) -> (Point2, Point2) {
    let pts: Vec<Point2> = band.rects.iter().flat_map(|r| r.ring().iter().copied()).collect();
    bbox(&pts)
}

fn overlapping<'a>(scene: &'a Scene, area: (Point2, Point2)) -> Vec<Shape<'a>> {
    scene
        .obstacles
        .iter()
        .map(|o| Shape::new(&o.footprint))
        .filter(|s| s.lo.x <= area.1.x && s.hi.x >= area.0.x && s.lo.y <= area.1.y && s.hi.y >= area.0.y)
        .collect()
}

/// (covered, band) cell counts of the obstacle union inside `band`.
pub fn raster_coverage(scene: &Scene, band: &Band, pitch: f64) -> (usize, usize) {
    let area = band_rect(band);
    let rects: Vec<Shape> = band.rects.iter().map(Shape::new).collect();
    let obs = overlapping(scene, area);
    let (mut covered, mut total) = (0, 0);
    for c in cells(area, pitch) {
        if rects.iter().any(|r| r.contains(c)) {
            total += 1;
            covered += usize::from(obs.iter().any(|o| o.contains(c)));
        }
    }
    (covered, total)
}

/// Reflection score of the obstacle union clipped to `band`, estimated on a
/// raster: the share of occupied cells whose mirror image is occupied too.
/// Reflection preserves area, so this equals `1 - |G xor R(G)| / (2 |G|)`.
pub fn raster_symmetry(scene: &Scene, band: &Band, axes: &[Axis], pitch: f64) -> f64 {
    let area = band_rect(band);
    let rects: Vec<Shape> = band.rects.iter().map(Shape::new).collect();
    let obs = overlapping(scene, area);
    let in_g = |p: Point2| rects.iter().any(|r| r.contains(p)) && obs.iter().any(|o| o.contains(p));
    let occupied: Vec<Point2> = if obs.is_empty() { Vec::new() } else { cells(area, pitch).filter(|&c| in_g(c)).collect() };
    if occupied.is_empty() {
        return 1.0;
    }
    axes.iter()
        .map(|a| occupied.iter().filter(|&&p| in_g(a.reflect(p))).count() as f64 / occupied.len() as f64)
        .fold(0.0, f64::max)
}

/// Occupancy raster of walls and obstacle footprints.
pub struct Grid {
    origin: Point2,
    pitch: f64,
    nx: usize,
    ny: usize,
    blocked: Vec<bool>,
}

impl Grid {
    pub fn new(scene: &Scene, pitch: f64) -> Self {
        let Rect { min, max } = scene.bounds;
        let nx = ((max.x - min.x) / pitch).ceil() as usize;
        let ny = ((max.y - min.y) / pitch).ceil() as usize;
        let mut blocked = vec![false; nx * ny];
        let polys = scene.walls.iter().map(|w| &w.footprint).chain(scene.obstacles.iter().map(|o| &o.footprint));
        for poly in polys {
            let s = Shape::new(poly);
            let i0 = (((s.lo.x - min.x) / pitch).floor().max(0.0)) as usize;
            let j0 = (((s.lo.y - min.y) / pitch).floor().max(0.0)) as usize;
            let i1 = (((s.hi.x - min.x) / pitch).ceil() as usize).min(nx);
            let j1 = (((s.hi.y - min.y) / pitch).ceil() as usize).min(ny);
            for j in j0..j1 {
                for i in i0..i1 {
                    let c = Point2::new(min.x + (i as f64 + 0.5) * pitch, min.y + (j as f64 + 0.5) * pitch);
                    if s.contains(c) {
                        blocked[j * nx + i] = true;
                    }
                }
            }
        }
        Self { origin: min, pitch, nx, ny, blocked }
    }

    fn blocked_at(&self, p: Point2) -> bool {
        let i = ((p.x - self.origin.x) / self.pitch).floor();
        let j = ((p.y - self.origin.y) / self.pitch).floor();
        if i < 0.0 || j < 0.0 || i as usize >= self.nx || j as usize >= self.ny {
            return false;
        }
        self.blocked[j as usize * self.nx + i as usize]
    }

    /// Walks the segment in quarter-cell steps; the cells holding the two
    /// endpoints are ignored.
    pub fn clear(&self, a: Point2, b: Point2) -> bool {
        let d = Point2::new(b.x - a.x, b.y - a.y);
        let len = (d.x * d.x + d.y * d.y).sqrt();
        let step = self.pitch / 4.0;
        let n = (len / step).ceil() as usize;
        (1..n).all(|k| {
            let t = k as f64 / n as f64;
            let s = t * len;
            if s < self.pitch || len - s < self.pitch {
                return true;
            }
            !self.blocked_at(Point2::new(a.x + d.x * t, a.y + d.y * t))
        })
    }
}
