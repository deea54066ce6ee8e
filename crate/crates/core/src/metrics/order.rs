//! Template fitting of object positions: line, rectangular grid, circle.
//!
//! An object is "ordered" under a template instance when its centroid lies
//! within the residual tolerance of it. Small point sets fit some template
//! trivially (two points are always collinear, three always concyclic), so an
//! instance only counts when it explains every object or reaches a minimum
//! support: 3 for lines, 4 for grids and circles.

use std::collections::HashMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::band::Band;
use crate::geometry::{Point2, Scene};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderTemplate {
    Grid,
    Line,
    Circle,
    None,
}

/// Concrete fitted template.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TemplateInstance {
    Line { point: Point2, direction: Point2 },
    Grid { origin: Point2, u: Point2, spacing_u: f64, spacing_v: f64 },
    Circle { center: Point2, radius: f64 },
}

impl TemplateInstance {
    pub fn template(&self) -> OrderTemplate {
        match self {
            TemplateInstance::Line { .. } => OrderTemplate::Line,
            TemplateInstance::Grid { .. } => OrderTemplate::Grid,
            TemplateInstance::Circle { .. } => OrderTemplate::Circle,
        }
    }

    /// Nearest point of the template to `p`.
    pub fn snap(&self, p: Point2) -> Point2 {
        match *self {
            TemplateInstance::Line { point, direction } => point + direction * (p - point).dot(direction),
            TemplateInstance::Grid { origin, u, spacing_u, spacing_v } => {
                let v = u.perp();
                let d = p - origin;
                let iu = (d.dot(u) / spacing_u).round();
                let iv = (d.dot(v) / spacing_v).round();
                origin + u * (iu * spacing_u) + v * (iv * spacing_v)
            }
            TemplateInstance::Circle { center, radius } => match (p - center).normalized() {
                Some(dir) => center + dir * radius,
                None => center + Point2::new(radius, 0.0),
            },
        }
    }

    pub fn residual(&self, p: Point2) -> f64 {
        p.distance(self.snap(p))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TemplateFit {
    pub instance: TemplateInstance,
    pub inliers: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderMeasure {
    pub ordered_fraction: f64,
    pub best_template: OrderTemplate,
    pub object_count: usize,
    pub best_fit: Option<TemplateFit>,
    pub per_segment_fractions: Vec<f64>,
    pub per_segment_templates: Vec<OrderTemplate>,
}

/// Grid orientations are taken from the difference vectors to this many
/// nearest neighbours of every point, so the search follows the points.
const GRID_DIRECTION_NEIGHBOURS: usize = 3;
const SPACING_STEP: f64 = 0.05;
/// Grid spacings below this multiple of the tolerance make every point an inlier.
const MIN_SPACING_TOLERANCES: f64 = 4.0;
const FULL_SEARCH_LINE: usize = 30;
const FULL_SEARCH_CIRCLE: usize = 16;
const NEIGHBOURS_LINE: usize = 8;
const NEIGHBOURS_CIRCLE: usize = 6;

fn accepted(inliers: usize, n: usize, min_support: usize) -> bool {
    inliers == n || inliers >= min_support
}

/// Best instance of each template (grid, line, circle order) for `points`.
pub fn fit_templates(points: &[Point2], tol: f64) -> [Option<TemplateFit>; 3] {
    if points.is_empty() {
        return [None, None, None];
    }
    // Work relative to the centroid so modular grid arithmetic stays exact
    // enough and results do not depend on where the scene sits.
    let n = points.len();
    let c = points.iter().fold(Point2::default(), |a, &p| a + p) * (1.0 / n as f64);
    let local: Vec<Point2> = points.iter().map(|&p| p - c).collect();
    let neighbours = neighbour_lists(&local);
    let shift = |f: Option<TemplateFit>| {
        f.map(|mut f| {
            f.instance = match f.instance {
                TemplateInstance::Line { point, direction } => TemplateInstance::Line { point: point + c, direction },
                TemplateInstance::Grid { origin, u, spacing_u, spacing_v } => {
                    TemplateInstance::Grid { origin: origin + c, u, spacing_u, spacing_v }
                }
                TemplateInstance::Circle { center, radius } => TemplateInstance::Circle { center: center + c, radius },
            };
            f
        })
    };
    [
        shift(fit_grid(&local, &neighbours, tol).filter(|f| accepted(f.inliers, n, 4))),
        shift(fit_line(&local, &neighbours, tol).filter(|f| accepted(f.inliers, n, 3))),
        shift(fit_circle(&local, &neighbours, tol).filter(|f| accepted(f.inliers, n, 4))),
    ]
}

/// Ordered fraction and best template for a set of object centroids.
pub fn order_of_points(points: &[Point2], tol: f64) -> (f64, OrderTemplate, Option<TemplateFit>) {
    if points.is_empty() {
        return (1.0, OrderTemplate::None, None);
    }
    let fits = fit_templates(points, tol);
    let mut best: Option<TemplateFit> = None;
    for f in fits.into_iter().flatten() {
        if best.is_none_or(|b| f.inliers > b.inliers) {
            best = Some(f);
        }
    }
    match best {
        Some(f) => (f.inliers as f64 / points.len() as f64, f.instance.template(), Some(f)),
        None => (0.0, OrderTemplate::None, None),
    }
}

/// Centroids of obstacles whose centroid lies in the band.
pub fn centroids_in(scene: &Scene, band: &Band) -> Vec<Point2> {
    scene
        .obstacles
        .iter()
        .map(|o| o.footprint.centroid())
        .filter(|&c| band.contains(c))
        .collect()
}

/// Memo of template fits keyed by the exact centroid list, shared across
/// candidate evaluations that leave the objects untouched.
#[derive(Default)]
pub struct OrderCache {
    fits: Mutex<HashMap<Vec<u64>, (f64, OrderTemplate, Option<TemplateFit>)>>,
}

impl OrderCache {
    pub fn new() -> Self {
        Self::default()
    }

    fn order_of_points(&self, points: &[Point2], tol: f64) -> (f64, OrderTemplate, Option<TemplateFit>) {
        let mut key = Vec::with_capacity(2 * points.len() + 1);
        key.push(tol.to_bits());
        key.extend(points.iter().flat_map(|p| [p.x.to_bits(), p.y.to_bits()]));
        if let Some(hit) = self.fits.lock().expect("order cache lock").get(&key) {
            return *hit;
        }
        let value = order_of_points(points, tol);
        self.fits.lock().expect("order cache lock").insert(key, value);
        value
    }
}

fn cached_order(cache: Option<&OrderCache>, points: &[Point2], tol: f64) -> (f64, OrderTemplate, Option<TemplateFit>) {
    match cache {
        Some(c) => c.order_of_points(points, tol),
        None => order_of_points(points, tol),
    }
}

pub fn order_with_bands(scene: &Scene, bands: &[Band], whole: &Band, tol: f64) -> OrderMeasure {
    order_with_cache(scene, bands, whole, tol, None)
}

pub fn order_with_cache(scene: &Scene, bands: &[Band], whole: &Band, tol: f64, cache: Option<&OrderCache>) -> OrderMeasure {
    let mut per_segment_fractions = Vec::with_capacity(bands.len());
    let mut per_segment_templates = Vec::with_capacity(bands.len());
    for band in bands {
        let (f, t, _) = cached_order(cache, &centroids_in(scene, band), tol);
        per_segment_fractions.push(f);
        per_segment_templates.push(t);
    }
    let pts = centroids_in(scene, whole);
    let (ordered_fraction, best_template, best_fit) = cached_order(cache, &pts, tol);
    OrderMeasure {
        ordered_fraction,
        best_template,
        object_count: pts.len(),
        best_fit,
        per_segment_fractions,
        per_segment_templates,
    }
}

fn neighbour_lists(points: &[Point2]) -> Vec<Vec<usize>> {
    (0..points.len())
        .map(|i| {
            let mut idx: Vec<usize> = (0..points.len()).filter(|&j| j != i).collect();
            idx.sort_by(|&a, &b| {
                points[i].distance(points[a]).total_cmp(&points[i].distance(points[b])).then(a.cmp(&b))
            });
            idx
        })
        .collect()
}

fn count_inliers(inst: &TemplateInstance, points: &[Point2], tol: f64) -> (usize, f64) {
    let mut count = 0;
    let mut spread = 0.0;
    for &p in points {
        let r = inst.residual(p);
        if r <= tol + 1e-9 {
            count += 1;
            spread += r;
        }
    }
    (count, spread)
}

fn better(candidate: (usize, f64), incumbent: Option<(usize, f64)>) -> bool {
    match incumbent {
        None => true,
        Some((n, s)) => candidate.0 > n || (candidate.0 == n && candidate.1 < s - 1e-12),
    }
}

fn tls_line(points: &[Point2]) -> Option<TemplateInstance> {
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
    if sxx + syy <= 0.0 {
        return None;
    }
    let angle = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    Some(TemplateInstance::Line { point: mean, direction: Point2::new(angle.cos(), angle.sin()) })
}

fn fit_line(points: &[Point2], neighbours: &[Vec<usize>], tol: f64) -> Option<TemplateFit> {
    let n = points.len();
    if n == 1 {
        let inst = TemplateInstance::Line { point: points[0], direction: Point2::new(1.0, 0.0) };
        return Some(TemplateFit { instance: inst, inliers: 1 });
    }
    let mut best: Option<(usize, f64, TemplateInstance)> = None;
    let mut consider = |inst: TemplateInstance| {
        let score = count_inliers(&inst, points, tol);
        if better(score, best.map(|b| (b.0, b.1))) {
            best = Some((score.0, score.1, inst));
        }
        inst
    };
    let mut try_pair = |i: usize, j: usize| {
        let Some(direction) = (points[j] - points[i]).normalized() else { return };
        let inst = consider(TemplateInstance::Line { point: points[i], direction });
        let inl: Vec<Point2> = points.iter().copied().filter(|&p| inst.residual(p) <= tol + 1e-9).collect();
        if inl.len() > 2 {
            if let Some(refined) = tls_line(&inl) {
                consider(refined);
            }
        }
    };
    if n <= FULL_SEARCH_LINE {
        for i in 0..n {
            for j in i + 1..n {
                try_pair(i, j);
            }
        }
    } else {
        for i in 0..n {
            for &j in neighbours[i].iter().take(NEIGHBOURS_LINE) {
                try_pair(i, j);
            }
        }
    }
    best.map(|(inliers, _, instance)| TemplateFit { instance, inliers })
}

fn circumcircle(a: Point2, b: Point2, c: Point2) -> Option<TemplateInstance> {
    let d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
    let scale = (b - a).norm().max((c - a).norm());
    if d.abs() <= 1e-9 * scale * scale {
        return None;
    }
    let (a2, b2, c2) = (a.dot(a), b.dot(b), c.dot(c));
    let center = Point2::new(
        (a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d,
        (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d,
    );
    let radius = center.distance(a);
    (radius.is_finite() && radius < 1e4).then_some(TemplateInstance::Circle { center, radius })
}

/// Algebraic (Kasa) circle fit: least squares on x^2 + y^2 + Dx + Ey + F = 0.
pub fn algebraic_circle(points: &[Point2]) -> Option<TemplateInstance> {
    if points.len() < 3 {
        return None;
    }
    let mut m = [[0.0f64; 4]; 3];
    for &p in points {
        let row = [p.x, p.y, 1.0];
        let rhs = -(p.x * p.x + p.y * p.y);
        for r in 0..3 {
            for c in 0..3 {
                m[r][c] += row[r] * row[c];
            }
            m[r][3] += row[r] * rhs;
        }
    }
    let sol = solve3(m)?;
    let center = Point2::new(-sol[0] / 2.0, -sol[1] / 2.0);
    let r2 = center.dot(center) - sol[2];
    (r2 > 0.0 && r2.sqrt() < 1e4).then(|| TemplateInstance::Circle { center, radius: r2.sqrt() })
}

fn solve3(mut m: [[f64; 4]; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[pivot][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, pivot);
        for r in 0..3 {
            if r != col {
                let f = m[r][col] / m[col][col];
                for c in col..4 {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    Some([m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]])
}

fn fit_circle(points: &[Point2], neighbours: &[Vec<usize>], tol: f64) -> Option<TemplateFit> {
    let n = points.len();
    if n < 3 {
        return None;
    }
    let mut best: Option<(usize, f64, TemplateInstance)> = None;
    let mut try_triple = |i: usize, j: usize, k: usize| {
        let Some(inst) = circumcircle(points[i], points[j], points[k]) else { return };
        let score = count_inliers(&inst, points, tol);
        if better(score, best.map(|b| (b.0, b.1))) {
            best = Some((score.0, score.1, inst));
        }
        if score.0 > 3 {
            let inl: Vec<Point2> = points.iter().copied().filter(|&p| inst.residual(p) <= tol + 1e-9).collect();
            if let Some(refined) = algebraic_circle(&inl) {
                let s = count_inliers(&refined, points, tol);
                if better(s, best.map(|b| (b.0, b.1))) {
                    best = Some((s.0, s.1, refined));
                }
            }
        }
    };
    if n <= FULL_SEARCH_CIRCLE {
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    try_triple(i, j, k);
                }
            }
        }
    } else {
        for i in 0..n {
            let nb: Vec<usize> = neighbours[i].iter().take(NEIGHBOURS_CIRCLE).copied().collect();
            for a in 0..nb.len() {
                for b in a + 1..nb.len() {
                    try_triple(i, nb[a], nb[b]);
                }
            }
        }
    }
    best.map(|(inliers, _, instance)| TemplateFit { instance, inliers })
}

fn median_nearest_distance(points: &[Point2], neighbours: &[Vec<usize>]) -> f64 {
    let mut d: Vec<f64> = (0..points.len())
        .filter_map(|i| neighbours[i].first().map(|&j| points[i].distance(points[j])))
        .collect();
    if d.is_empty() {
        return 0.0;
    }
    d.sort_by(f64::total_cmp);
    let m = d.len();
    if m % 2 == 1 {
        d[m / 2]
    } else {
        0.5 * (d[m / 2 - 1] + d[m / 2])
    }
}

/// Best (count, spacing, offset) of a 1D lattice for `values`.
fn best_lattice(values: &[f64], spacings: &[f64], tol: f64, scratch: &mut LatticeScratch) -> (usize, f64, f64) {
    let n = values.len();
    let mut best = (0usize, f64::INFINITY, spacings[0], 0.0);
    let LatticeScratch { residues, sums, squares } = scratch;
    for &s in spacings {
        residues.clear();
        residues.extend(values.iter().map(|v| {
            let r = v - s * (v / s).floor();
            if r >= s { r - s } else { r }
        }));
        residues.sort_unstable_by(f64::total_cmp);
        // Prefix sums over the doubled (unwrapped) sequence.
        sums.clear();
        squares.clear();
        sums.push(0.0);
        squares.push(0.0);
        for k in 0..2 * n {
            let x = if k < n { residues[k] } else { residues[k - n] + s };
            sums.push(sums[k] + x);
            squares.push(squares[k] + x * x);
        }
        let at = |k: usize| if k < n { residues[k] } else { residues[k - n] + s };
        let mut j = 0;
        for i in 0..n {
            if j < i {
                j = i;
            }
            while j + 1 < i + n && at(j + 1) - at(i) <= 2.0 * tol + 1e-12 {
                j += 1;
            }
            let count = j - i + 1;
            if count < best.0 {
                continue;
            }
            let sum = sums[j + 1] - sums[i];
            let mean = sum / count as f64;
            let spread = (squares[j + 1] - squares[i]) - sum * mean;
            if count > best.0 || spread < best.1 - 1e-12 {
                best = (count, spread, s, mean);
            }
        }
    }
    (best.0, best.2, best.3)
}

#[derive(Default)]
struct LatticeScratch {
    residues: Vec<f64>,
    sums: Vec<f64>,
    squares: Vec<f64>,
}

fn wrap(x: f64, s: f64) -> f64 {
    x - s * (x / s).round()
}

/// Unit directions in [0, 90) degrees of neighbour difference vectors,
/// sorted, exact duplicates removed.
fn grid_directions(points: &[Point2], neighbours: &[Vec<usize>]) -> Vec<Point2> {
    let quarter = std::f64::consts::FRAC_PI_2;
    let mut angles: Vec<f64> = Vec::new();
    for (i, list) in neighbours.iter().enumerate() {
        for &j in list.iter().take(GRID_DIRECTION_NEIGHBOURS) {
            let d = points[j] - points[i];
            let a = d.y.atan2(d.x).rem_euclid(quarter);
            angles.push(if a >= quarter - 1e-12 { 0.0 } else { a });
        }
    }
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
    angles.into_iter().map(|a| Point2::new(a.cos(), a.sin())).collect()
}

fn fit_grid(points: &[Point2], neighbours: &[Vec<usize>], tol: f64) -> Option<TemplateFit> {
    let n = points.len();
    let min_spacing = MIN_SPACING_TOLERANCES * tol;
    if n == 1 {
        let inst = TemplateInstance::Grid { origin: points[0], u: Point2::new(1.0, 0.0), spacing_u: min_spacing.max(1.0), spacing_v: min_spacing.max(1.0) };
        return Some(TemplateFit { instance: inst, inliers: 1 });
    }
    let m = median_nearest_distance(points, neighbours);
    let lo = (0.5 * m).max(min_spacing);
    let hi = 1.5 * m;
    if hi < lo {
        return None;
    }
    let steps = ((hi - lo) / SPACING_STEP + 1e-9).floor() as usize;
    let spacings: Vec<f64> = (0..=steps).map(|k| lo + k as f64 * SPACING_STEP).collect();
    let mut scratch = LatticeScratch::default();
    let mut us = vec![0.0; n];
    let mut vs = vec![0.0; n];
    let mut best: Option<(usize, f64, TemplateInstance)> = None;
    for u in grid_directions(points, neighbours) {
        let v = u.perp();
        for (k, p) in points.iter().enumerate() {
            us[k] = p.dot(u);
            vs[k] = p.dot(v);
        }
        let (cu, su, ou) = best_lattice(&us, &spacings, tol, &mut scratch);
        if best.is_some_and(|b| cu < b.0) {
            continue;
        }
        let (cv, sv, ov) = best_lattice(&vs, &spacings, tol, &mut scratch);
        if best.is_some_and(|b| cv < b.0) {
            continue;
        }
        let mut count = 0;
        let mut spread = 0.0;
        for k in 0..n {
            let (du, dv) = (wrap(us[k] - ou, su), wrap(vs[k] - ov, sv));
            let r2 = du * du + dv * dv;
            if r2 <= (tol + 1e-9) * (tol + 1e-9) {
                count += 1;
                spread += r2;
            }
        }
        if better((count, spread), best.map(|b| (b.0, b.1))) {
            let inst = TemplateInstance::Grid { origin: u * ou + v * ov, u, spacing_u: su, spacing_v: sv };
            best = Some((count, spread, inst));
        }
    }
    best.map(|(inliers, _, instance)| TemplateFit { instance, inliers })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(nx: usize, ny: usize, s: f64) -> Vec<Point2> {
        let mut v = Vec::new();
        for i in 0..nx {
            for j in 0..ny {
                v.push(Point2::new(1.0 + i as f64 * s, 2.0 + j as f64 * s));
            }
        }
        v
    }

    #[test]
    fn exact_grid_is_fully_ordered() {
        let (f, t, _) = order_of_points(&grid(3, 3, 2.0), 0.25);
        assert_eq!((f, t), (1.0, OrderTemplate::Grid));
    }

    #[test]
    fn no_objects() {
        assert_eq!(order_of_points(&[], 0.25).0, 1.0);
        assert_eq!(order_of_points(&[], 0.25).1, OrderTemplate::None);
    }

    #[test]
    fn points_on_a_circle() {
        let pts: Vec<Point2> = (0..7)
            .map(|k| {
                let a = (k as f64) * 0.9;
                Point2::new(3.0 + 5.0 * a.cos(), -1.0 + 5.0 * a.sin())
            })
            .collect();
        let (f, t, fit) = order_of_points(&pts, 0.25);
        assert_eq!(f, 1.0);
        // Grid precedence only wins on ties; an irregular ring is not a grid.
        assert_eq!(t, OrderTemplate::Circle, "{fit:?}");
    }

    #[test]
    fn unevenly_spaced_collinear_points() {
        let pts: Vec<Point2> = [0.0, 1.3, 3.9, 4.4, 8.0, 11.7].iter().map(|&t| Point2::new(t, 0.5 * t)).collect();
        let (f, t, _) = order_of_points(&pts, 0.1);
        assert_eq!((f, t), (1.0, OrderTemplate::Line));
    }

    #[test]
    fn circle_algebraic_fit_recovers_radius() {
        let pts: Vec<Point2> = (0..12)
            .map(|k| {
                let a = k as f64 * std::f64::consts::TAU / 12.0;
                Point2::new(2.0 + 3.0 * a.cos(), 1.0 + 3.0 * a.sin())
            })
            .collect();
        let TemplateInstance::Circle { center, radius } = algebraic_circle(&pts).unwrap() else { panic!() };
        assert!((radius - 3.0).abs() < 1e-9);
        assert!(center.distance(Point2::new(2.0, 1.0)) < 1e-9);
    }

    #[test]
    fn grid_snap_lands_on_nodes() {
        let fit = fit_templates(&grid(3, 3, 2.0), 0.25)[0].unwrap();
        let q = fit.instance.snap(Point2::new(3.3, 3.8));
        assert!(q.distance(Point2::new(3.0, 4.0)) < 1e-6, "{q:?}");
    }
}
