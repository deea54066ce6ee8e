//! Areas of boolean combinations of polygon groups.
//!
//! A vertical slab decomposition: slab boundaries sit at every vertex and
//! every edge crossing, so inside a slab the edges never cross and the
//! covered length varies linearly with x. Measuring the covered length at the
//! slab midline therefore integrates each slab exactly.

use super::Point2;

#[derive(Clone, Copy, Debug)]
struct SlabEdge {
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
    poly: u32,
}

impl SlabEdge {
    fn y_at(&self, x: f64) -> f64 {
        self.y0 + (self.y1 - self.y0) * (x - self.x0) / (self.x1 - self.x0)
    }
}

/// A set of polygons tagged with group ids. Within a group, a point is inside
/// when any polygon of the group contains it.
#[derive(Clone, Debug, Default)]
pub struct RegionSet {
    edges: Vec<SlabEdge>,
    poly_group: Vec<usize>,
    groups: usize,
}

impl RegionSet {
    pub fn new(groups: usize) -> Self {
        Self { edges: Vec::new(), poly_group: Vec::new(), groups }
    }

    pub fn add_polygon(&mut self, group: usize, ring: &[Point2]) {
        assert!(group < self.groups, "group {group} out of range");
        let poly = self.poly_group.len() as u32;
        self.poly_group.push(group);
        let n = ring.len();
        for i in 0..n {
            let (a, b) = (ring[i], ring[(i + 1) % n]);
            if a.x == b.x {
                continue;
            }
            let (l, r) = if a.x < b.x { (a, b) } else { (b, a) };
            self.edges.push(SlabEdge { x0: l.x, y0: l.y, x1: r.x, y1: r.y, poly });
        }
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Area of the region where `inside(membership)` holds, `membership[g]`
    /// telling whether the point lies in group `g`.
    pub fn area_where(&self, inside: impl Fn(&[bool]) -> bool) -> f64 {
        if self.edges.is_empty() {
            return 0.0;
        }
        let mut edges = self.edges.clone();
        edges.sort_by(|a, b| a.x0.total_cmp(&b.x0));
        let mut xs: Vec<f64> = Vec::with_capacity(edges.len() * 3);
        for e in &edges {
            xs.push(e.x0);
            xs.push(e.x1);
        }
        for i in 0..edges.len() {
            let a = edges[i];
            let (a_lo, a_hi) = (a.y0.min(a.y1), a.y0.max(a.y1));
            for b in &edges[i + 1..] {
                if b.x0 >= a.x1 {
                    break;
                }
                if a.poly == b.poly && (a.x0 == b.x0 || a.x1 == b.x1 || a.x1 == b.x0) {
                    continue;
                }
                let (b_lo, b_hi) = (b.y0.min(b.y1), b.y0.max(b.y1));
                if b_lo > a_hi || a_lo > b_hi {
                    continue;
                }
                if let Some(x) = crossing_x(&a, b) {
                    xs.push(x);
                }
            }
        }
        xs.sort_by(f64::total_cmp);
        xs.dedup();

        let mut active: Vec<SlabEdge> = Vec::new();
        let mut next = 0;
        let mut ys: Vec<(f64, u32)> = Vec::new();
        let mut parity = vec![false; self.poly_group.len()];
        let mut counts = vec![0i32; self.groups];
        let mut member = vec![false; self.groups];
        let mut area = 0.0;
        for w in xs.windows(2) {
            let (xa, xb) = (w[0], w[1]);
            let width = xb - xa;
            if width <= 0.0 {
                continue;
            }
            let xm = 0.5 * (xa + xb);
            while next < edges.len() && edges[next].x0 < xm {
                active.push(edges[next]);
                next += 1;
            }
            active.retain(|e| e.x1 > xm);
            if active.is_empty() {
                continue;
            }
            ys.clear();
            ys.extend(active.iter().map(|e| (e.y_at(xm), e.poly)));
            ys.sort_by(|a, b| a.0.total_cmp(&b.0));
            parity.iter_mut().for_each(|p| *p = false);
            counts.iter_mut().for_each(|c| *c = 0);
            let mut covered = 0.0;
            for k in 0..ys.len() {
                let (y, poly) = ys[k];
                let p = &mut parity[poly as usize];
                *p = !*p;
                counts[self.poly_group[poly as usize]] += if *p { 1 } else { -1 };
                if k + 1 < ys.len() {
                    for (m, &c) in member.iter_mut().zip(&counts) {
                        *m = c > 0;
                    }
                    if inside(&member) {
                        covered += ys[k + 1].0 - y;
                    }
                }
            }
            area += covered * width;
        }
        area
    }
}

fn crossing_x(a: &SlabEdge, b: &SlabEdge) -> Option<f64> {
    let r = Point2::new(a.x1 - a.x0, a.y1 - a.y0);
    let s = Point2::new(b.x1 - b.x0, b.y1 - b.y0);
    let denom = r.cross(s);
    if denom == 0.0 {
        return None;
    }
    let q = Point2::new(b.x0 - a.x0, b.y0 - a.y0);
    let t = q.cross(s) / denom;
    let u = q.cross(r) / denom;
    if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u) {
        let x = a.x0 + t * r.x;
        (x > a.x0.max(b.x0) && x < a.x1.min(b.x1)).then_some(x)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq(x: f64, y: f64, s: f64) -> Vec<Point2> {
        vec![
            Point2::new(x, y),
            Point2::new(x + s, y),
            Point2::new(x + s, y + s),
            Point2::new(x, y + s),
        ]
    }

    #[test]
    fn union_and_intersection_of_overlapping_squares() {
        let mut r = RegionSet::new(2);
        r.add_polygon(0, &sq(0., 0., 2.));
        r.add_polygon(1, &sq(1., 1., 2.));
        assert!((r.area_where(|m| m[0] || m[1]) - 7.0).abs() < 1e-12);
        assert!((r.area_where(|m| m[0] && m[1]) - 1.0).abs() < 1e-12);
        assert!((r.area_where(|m| m[0] != m[1]) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn overlapping_polygons_in_one_group_count_once() {
        let mut r = RegionSet::new(1);
        r.add_polygon(0, &sq(0., 0., 2.));
        r.add_polygon(0, &sq(1., 0., 2.));
        assert!((r.area_where(|m| m[0]) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn rotated_diamond_clipped_by_square() {
        let diamond = vec![
            Point2::new(1., 0.),
            Point2::new(2., 1.),
            Point2::new(1., 2.),
            Point2::new(0., 1.),
        ];
        let mut r = RegionSet::new(2);
        r.add_polygon(0, &diamond);
        r.add_polygon(1, &sq(1., 0., 2.));
        assert!((r.area_where(|m| m[0] && m[1]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn concave_polygon_area() {
        let l = vec![
            Point2::new(0., 0.),
            Point2::new(3., 0.),
            Point2::new(3., 1.),
            Point2::new(1., 1.),
            Point2::new(1., 3.),
            Point2::new(0., 3.),
        ];
        let mut r = RegionSet::new(1);
        r.add_polygon(0, &l);
        assert!((r.area_where(|m| m[0]) - 5.0).abs() < 1e-12);
    }
}
