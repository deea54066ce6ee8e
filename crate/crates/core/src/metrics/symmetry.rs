use serde::{Deserialize, Serialize};

use super::band::{obstacles_near, Band};
use crate::geometry::{clip_half_plane, Axis, NavPath, Point2, RegionSet, Scene};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryMeasure {
    pub best_score: f64,
    pub best_axis: Option<Axis>,
    pub per_segment_scores: Vec<f64>,
    pub per_segment_axes: Vec<Option<Axis>>,
}

/// Both midlines of the bounding box of `points` taken in the frame whose
/// first axis is `direction`.
fn frame_midlines(points: impl Iterator<Item = Point2>, direction: Point2) -> Vec<Axis> {
    let Some(d) = direction.normalized() else { return Vec::new() };
    let n = d.perp();
    let (mut u0, mut u1, mut v0, mut v1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in points {
        let (u, v) = (p.dot(d), p.dot(n));
        u0 = u0.min(u);
        u1 = u1.max(u);
        v0 = v0.min(v);
        v1 = v1.max(v);
    }
    if !u0.is_finite() {
        return Vec::new();
    }
    let center = d * (0.5 * (u0 + u1)) + n * (0.5 * (v0 + v1));
    vec![Axis { point: center, direction: d }, Axis { point: center, direction: n }]
}

/// Principal axes through the centroid, `None` when the spread is isotropic
/// (no preferred direction) or there are fewer than two points.
pub(crate) fn principal_axes(points: &[Point2]) -> Option<(Point2, Point2, Point2)> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mean = points.iter().fold(Point2::default(), |a, &p| a + p) * (1.0 / n);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &p in points {
        let d = p - mean;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    }
    let spread = sxx + syy;
    let anisotropy = ((sxx - syy).powi(2) + 4.0 * sxy * sxy).sqrt();
    if spread <= 0.0 || anisotropy <= 1e-9 * spread {
        return None;
    }
    let angle = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let major = Point2::new(angle.cos(), angle.sin());
    Some((mean, major, major.perp()))
}

/// Candidate reflection axes for one segment band: midlines of the band's
/// box in the segment's own frame, then principal axes of the footprint
/// area inside the band.
pub fn segment_axes(scene: &Scene, path: &NavPath, segment: usize, band: &Band) -> Vec<Axis> {
    let verts = path.segment_vertices(segment);
    let chord = verts[verts.len() - 1] - verts[0];
    let mut axes = frame_midlines(band.vertices(), chord);
    axes.extend(area_axes(&clipped_pieces(scene, band)));
    axes
}

/// Footprints clipped to each band rectangle. Exact clipping (rather than
/// whole footprints whose bbox overlaps) keeps the candidate axes
/// independent of how the scene is oriented.
fn clipped_pieces(scene: &Scene, band: &Band) -> Vec<Vec<Point2>> {
    let near = obstacles_near(scene, band);
    let mut out = Vec::new();
    for rect in &band.rects {
        for &i in &near {
            let piece = clip_convex(scene.obstacles[i].footprint.ring(), rect.ring());
            if piece.len() >= 3 {
                out.push(piece);
            }
        }
    }
    out
}

fn clip_convex(ring: &[Point2], window: &[Point2]) -> Vec<Point2> {
    let n = window.len() as f64;
    let centre = window.iter().fold(Point2::default(), |a, &p| a + p) * (1.0 / n);
    let mut piece = ring.to_vec();
    for (k, &a) in window.iter().enumerate() {
        if piece.len() < 3 {
            break;
        }
        let b = window[(k + 1) % window.len()];
        let mut normal = (b - a).perp();
        if (centre - a).dot(normal) < 0.0 {
            normal = normal * -1.0;
        }
        piece = clip_half_plane(&piece, a, normal);
    }
    piece
}

/// Principal axes of the area of `pieces` (centroid and second moments),
/// so sliver or duplicate vertices from clipping carry no weight.
fn area_axes(pieces: &[Vec<Point2>]) -> Vec<Axis> {
    let Some(origin) = pieces.first().map(|p| p[0]) else { return Vec::new() };
    let (mut a, mut mx, mut my, mut mxx, mut myy, mut mxy) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for ring in pieces {
        let (mut pa, mut px, mut py, mut pxx, mut pyy, mut pxy) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        for i in 0..ring.len() {
            let p = ring[i] - origin;
            let q = ring[(i + 1) % ring.len()] - origin;
            let c = p.x * q.y - q.x * p.y;
            pa += c / 2.0;
            px += (p.x + q.x) * c / 6.0;
            py += (p.y + q.y) * c / 6.0;
            pxx += (p.x * p.x + p.x * q.x + q.x * q.x) * c / 12.0;
            pyy += (p.y * p.y + p.y * q.y + q.y * q.y) * c / 12.0;
            pxy += (p.x * q.y + 2.0 * p.x * p.y + 2.0 * q.x * q.y + q.x * p.y) * c / 24.0;
        }
        let sign = if pa < 0.0 { -1.0 } else { 1.0 };
        a += sign * pa;
        mx += sign * px;
        my += sign * py;
        mxx += sign * pxx;
        myy += sign * pyy;
        mxy += sign * pxy;
    }
    if a <= 1e-12 {
        return Vec::new();
    }
    let (cx, cy) = (mx / a, my / a);
    let sxx = mxx / a - cx * cx;
    let syy = myy / a - cy * cy;
    let sxy = mxy / a - cx * cy;
    let spread = sxx + syy;
    let anisotropy = ((sxx - syy).powi(2) + 4.0 * sxy * sxy).sqrt();
    if spread <= 0.0 || anisotropy <= 1e-9 * spread {
        return Vec::new();
    }
    let angle = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let major = Point2::new(angle.cos(), angle.sin());
    let m = origin + Point2::new(cx, cy);
    vec![Axis { point: m, direction: major }, Axis { point: m, direction: major.perp() }]
}

/// Candidate axes for the whole path band: every segment frame plus the
/// principal frame of the band and of the footprint vertices.
pub fn path_axes(scene: &Scene, path: &NavPath, bands: &[Band], whole: &Band) -> Vec<Axis> {
    let mut axes = Vec::new();
    for (i, band) in bands.iter().enumerate() {
        let verts = path.segment_vertices(i);
        axes.extend(frame_midlines(band.vertices(), verts[verts.len() - 1] - verts[0]));
    }
    let band_pts: Vec<Point2> = whole.vertices().collect();
    if let Some((_, major, _)) = principal_axes(&band_pts) {
        axes.extend(frame_midlines(band_pts.iter().copied(), major));
    }
    axes.extend(area_axes(&clipped_pieces(scene, whole)));
    axes
}

/// Reflection score of the footprint union clipped to `band`:
/// `1 - area(G xor R(G)) / (2 area(G))`, maximised over `axes`.
pub fn band_symmetry(scene: &Scene, band: &Band, axes: &[Axis]) -> (f64, Option<Axis>) {
    let near = obstacles_near(scene, band);
    let template = axes.first().copied();
    if near.is_empty() {
        return (1.0, template);
    }
    let mut base = RegionSet::new(2);
    for &i in &near {
        base.add_polygon(0, scene.obstacles[i].footprint.ring());
    }
    for r in &band.rects {
        base.add_polygon(1, r.ring());
    }
    let occupied = base.area_where(|m| m[0] && m[1]);
    if occupied <= 1e-12 {
        return (1.0, template);
    }
    let mut best: Option<(f64, Axis)> = None;
    for axis in axes {
        let mut region = RegionSet::new(4);
        for &i in &near {
            let fp = &scene.obstacles[i].footprint;
            region.add_polygon(0, fp.ring());
            region.add_polygon(2, axis.reflect_polygon(fp).ring());
        }
        for r in &band.rects {
            region.add_polygon(1, r.ring());
            region.add_polygon(3, axis.reflect_polygon(r).ring());
        }
        let xor = region.area_where(|m| (m[0] && m[1]) != (m[2] && m[3]));
        let score = (1.0 - xor / (2.0 * occupied)).clamp(0.0, 1.0);
        if best.is_none_or(|(s, _)| score > s) {
            best = Some((score, *axis));
        }
    }
    match best {
        Some((s, a)) => (s, Some(a)),
        None => (0.0, None),
    }
}

pub fn symmetry_with_bands(scene: &Scene, path: &NavPath, bands: &[Band], whole: &Band) -> SymmetryMeasure {
    let mut per_segment_scores = Vec::with_capacity(bands.len());
    let mut per_segment_axes = Vec::with_capacity(bands.len());
    for (i, band) in bands.iter().enumerate() {
        let (s, a) = band_symmetry(scene, band, &segment_axes(scene, path, i, band));
        per_segment_scores.push(s);
        per_segment_axes.push(a);
    }
    let (best_score, best_axis) = band_symmetry(scene, whole, &path_axes(scene, path, bands, whole));
    SymmetryMeasure { best_score, best_axis, per_segment_scores, per_segment_axes }
}
