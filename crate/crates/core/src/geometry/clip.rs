use super::{Point2, Polygon};

pub fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}

/// Closed-segment intersection test; touching within `eps` meters counts.
pub fn segments_intersect(a: Point2, b: Point2, c: Point2, d: Point2, eps: f64) -> bool {
    let r = b - a;
    let s = d - c;
    let denom = r.cross(s);
    let ac = c - a;
    let rl = r.norm();
    let sl = s.norm();
    if denom.abs() <= eps * rl.max(sl).max(1.0) * 1e-3 {
        // Parallel: only collinear overlap (or near-touching) intersects.
        return point_segment_distance(c, a, b) <= eps
            || point_segment_distance(d, a, b) <= eps
            || point_segment_distance(a, c, d) <= eps
            || point_segment_distance(b, c, d) <= eps;
    }
    let t = ac.cross(s) / denom;
    let u = ac.cross(r) / denom;
    let et = if rl > 0.0 { eps / rl } else { 0.0 };
    let eu = if sl > 0.0 { eps / sl } else { 0.0 };
    if t >= -et && t <= 1.0 + et && u >= -eu && u <= 1.0 + eu {
        return true;
    }
    // Endpoint proximity catches near-misses the parametric test rounds away.
    point_segment_distance(c, a, b) <= eps
        || point_segment_distance(d, a, b) <= eps
        || point_segment_distance(a, c, d) <= eps
        || point_segment_distance(b, c, d) <= eps
}

/// Distance from segment a-b to a polygon (0 when they touch or the segment
/// lies inside).
pub fn segment_polygon_distance(a: Point2, b: Point2, poly: &Polygon) -> f64 {
    if poly.contains(a) || poly.contains(b) {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for (c, d) in poly.edges() {
        if segments_intersect(a, b, c, d, 0.0) {
            return 0.0;
        }
        best = best
            .min(point_segment_distance(c, a, b))
            .min(point_segment_distance(a, c, d))
            .min(point_segment_distance(b, c, d));
    }
    best
}

/// Keeps the part of `ring` where `(p - origin) . normal >= 0`.
///
/// Exact for convex rings; concave rings may come back with zero-width
/// bridges along the cut line.
pub fn clip_half_plane(ring: &[Point2], origin: Point2, normal: Point2) -> Vec<Point2> {
    let side = |p: Point2| (p - origin).dot(normal);
    let n = ring.len();
    let mut out = Vec::with_capacity(n + 2);
    for i in 0..n {
        let cur = ring[i];
        let next = ring[(i + 1) % n];
        let (sc, sn) = (side(cur), side(next));
        if sc >= 0.0 {
            out.push(cur);
        }
        if (sc >= 0.0) != (sn >= 0.0) {
            let t = sc / (sc - sn);
            out.push(cur.lerp(next, t));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    #[test]
    fn crossing_and_touching_segments() {
        assert!(segments_intersect(p(0., 0.), p(2., 2.), p(0., 2.), p(2., 0.), 1e-9));
        assert!(segments_intersect(p(0., 0.), p(1., 0.), p(1., 0.), p(1., 1.), 1e-9));
        assert!(!segments_intersect(p(0., 0.), p(1., 0.), p(0., 1.), p(1., 1.), 1e-9));
        assert!(segments_intersect(p(0., 0.), p(2., 0.), p(1., 0.), p(3., 0.), 1e-9));
    }

    #[test]
    fn half_plane_clip_of_square() {
        let sq = [p(0., 0.), p(2., 0.), p(2., 2.), p(0., 2.)];
        let half = clip_half_plane(&sq, p(1., 0.), p(-1., 0.));
        let area = super::super::polygon_area(&half).unwrap();
        assert!((area - 2.0).abs() < 1e-12);
    }

    #[test]
    fn segment_to_polygon_distance() {
        let sq = Polygon::square(p(0., 0.), 2.0).unwrap();
        assert_eq!(segment_polygon_distance(p(-5., 3.), p(5., 3.), &sq), 2.0);
        assert_eq!(segment_polygon_distance(p(-5., 0.), p(5., 0.), &sq), 0.0);
    }
}
