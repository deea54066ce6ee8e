//! Single-step morphology operators. Each looks at the current morphology and
//! its report and proposes a short list of edits that move one attribute in
//! the requested direction; an empty list means the operator has no move.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::constraints::{clear_of_path, ConstraintSet};
use super::edit::{Edit, Morphology, Operator};
use crate::geometry::{
    segment_polygon_distance, Axis, NavPath, Obstacle, Point2, Polygon, RegionSet, Wall,
};
use crate::metrics::{centroids_in, fit_templates, path_band, segment_band, vantage_points, Band, TemplateFit};
use crate::scale::{Attribute, ComplexityReport, ScaleConfig};

/// Clearance kept between inserted objects and the path.
pub const INSERT_CLEARANCE: f64 = 0.3;
/// Side of the square objects inserted to raise clutter.
pub const UNIT_OBJECT: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// Make the attribute less complex.
    Lower,
    /// Make the attribute more complex.
    Raise,
}

pub fn operator_for(a: Attribute) -> Operator {
    match a {
        Attribute::Rotation => Operator::RotationSimplify,
        Attribute::Size => Operator::SizeFit,
        Attribute::Visibility => Operator::VisibilitySearch,
        Attribute::Symmetry => Operator::Symmetrize,
        Attribute::Clutter => Operator::ClutterAdjust,
        Attribute::Order => Operator::OrderImpose,
    }
}

/// Everything an operator may consult besides the morphology itself.
pub struct OpContext<'a> {
    pub constraints: &'a ConstraintSet,
    pub config: &'a ScaleConfig,
    /// Segments whose geometry may change; `None` means all.
    pub segments: Option<&'a [usize]>,
}

impl OpContext<'_> {
    fn allowed(&self, k: usize) -> bool {
        self.segments.is_none_or(|s| s.contains(&k))
    }

    fn allowed_segments(&self, nav: &NavPath) -> Vec<usize> {
        (0..nav.segments.len()).filter(|&k| self.allowed(k)).collect()
    }
}

/// Current morphology together with its derived path and report.
pub struct Snapshot<'a> {
    pub morph: &'a Morphology,
    pub nav: &'a NavPath,
    pub report: &'a ComplexityReport,
}

pub fn propose(
    attribute: Attribute,
    dir: Direction,
    ctx: &OpContext,
    snap: &Snapshot,
    magnitude: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<Edit> {
    match attribute {
        Attribute::Rotation => rotation_step(ctx, snap, dir, magnitude, rng),
        Attribute::Size => size_step(ctx, snap, dir, magnitude, rng),
        Attribute::Visibility => visibility_step(ctx, snap, dir, magnitude, rng),
        Attribute::Symmetry => symmetry_step(ctx, snap, dir, magnitude, rng),
        Attribute::Clutter => clutter_step(ctx, snap, dir, magnitude, rng),
        Attribute::Order => order_step(ctx, snap, dir, magnitude, rng),
    }
}

/// Index drawn with geometrically decreasing preference for the front.
fn pick_front(len: usize, rng: &mut ChaCha8Rng) -> usize {
    let k = len.min(3);
    let u: f64 = rng.gen();
    ((u * u) * k as f64).floor() as usize
}

fn edge_blocked(m: &Morphology, a: Point2, b: Point2) -> bool {
    m.scene
        .walls
        .iter()
        .map(|w| &w.footprint)
        .chain(m.scene.obstacles.iter().map(|o| &o.footprint))
        .any(|poly| segment_polygon_distance(a, b, poly) <= 1e-9)
}

fn polygons_overlap(a: &Polygon, b: &Polygon) -> bool {
    if !a.bbox().overlaps(&b.bbox()) {
        return false;
    }
    // Shared boundaries (equipment against a wall) are not an overlap.
    let mut region = RegionSet::new(2);
    region.add_polygon(0, a.ring());
    region.add_polygon(1, b.ring());
    region.area_where(|m| m[0] && m[1]) > 1e-9
}

fn in_bounds(m: &Morphology, poly: &Polygon) -> bool {
    poly.ring().iter().all(|&p| m.scene.bounds.contains(p))
}

/// A footprint that may be placed: inside bounds, clear of the path, and
/// not overlapping walls or other obstacles (`ignore` is skipped).
fn placeable(m: &Morphology, poly: &Polygon, clearance: f64, ignore: Option<&str>) -> bool {
    in_bounds(m, poly)
        && clear_of_path(&m.line, poly, clearance)
        && !m.scene.walls.iter().any(|w| polygons_overlap(&w.footprint, poly))
        && !m
            .scene
            .obstacles
            .iter()
            .filter(|o| Some(o.id.as_str()) != ignore)
            .any(|o| polygons_overlap(&o.footprint, poly))
}

fn scope_bands(ctx: &OpContext, snap: &Snapshot) -> Vec<Band> {
    ctx.allowed_segments(snap.nav)
        .into_iter()
        .filter_map(|k| segment_band(&snap.morph.scene, snap.nav, k).ok())
        .collect()
}

/// Movable obstacles whose centroid lies inside the scope bands.
fn scoped_obstacles(ctx: &OpContext, snap: &Snapshot, bands: &[Band]) -> Vec<usize> {
    snap.morph
        .scene
        .obstacles
        .iter()
        .enumerate()
        .filter(|(_, o)| ctx.constraints.is_movable(o))
        .filter(|(_, o)| {
            let c = o.footprint.centroid();
            bands.iter().any(|b| b.contains(c))
        })
        .map(|(i, _)| i)
        .collect()
}

fn fresh_id(existing: impl Iterator<Item = String>, prefix: &str) -> String {
    let next = existing
        .filter_map(|id| id.strip_prefix(prefix).and_then(|n| n.parse::<u64>().ok()))
        .max()
        .map_or(0, |n| n + 1);
    format!("{prefix}{next}")
}

fn moved_axes(m: &Morphology, old: Point2, new: Point2) -> Vec<Edit> {
    m.scene
        .corridors
        .iter()
        .filter_map(|c| {
            let mut axis = c.axis;
            let mut hit = false;
            for p in axis.iter_mut() {
                if p.distance(old) <= 1e-9 {
                    *p = new;
                    hit = true;
                }
            }
            (hit && axis[0].distance(axis[1]) > 1e-6).then(|| Edit::SetCorridorAxis { corridor: c.id.clone(), axis })
        })
        .collect()
}

fn segment_of_vertex(nav: &NavPath, v: usize) -> impl Iterator<Item = usize> + '_ {
    nav.segments
        .iter()
        .enumerate()
        .filter(move |(_, s)| s.span.start <= v && v <= s.span.end)
        .map(|(k, _)| k)
}

fn rotation_step(ctx: &OpContext, snap: &Snapshot, dir: Direction, mag: f64, rng: &mut ChaCha8Rng) -> Vec<Edit> {
    let m = snap.morph;
    let verts = m.line.vertices();
    let n = verts.len();
    match dir {
        Direction::Lower => {
            let mut cands: Vec<(f64, usize)> = (1..n - 1)
                .filter(|&v| segment_of_vertex(snap.nav, v).any(|k| ctx.allowed(k)))
                .map(|v| (snap.nav.turn_angles[v], v))
                .filter(|&(a, _)| a > 1e-6)
                .collect();
            cands.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            if cands.is_empty() {
                return Vec::new();
            }
            let v = cands[pick_front(cands.len(), rng)].1;
            let (prev, cur, next) = (verts[v - 1], verts[v], verts[v + 1]);
            let goal = prev.midpoint(next);
            let mut t = mag.clamp(0.05, 1.0);
            for _ in 0..5 {
                let to = cur.lerp(goal, t);
                if to.distance(prev) > 1e-6
                    && to.distance(next) > 1e-6
                    && !edge_blocked(m, prev, to)
                    && !edge_blocked(m, to, next)
                {
                    let mut edits = vec![Edit::MoveVertex { index: v, to }];
                    edits.extend(moved_axes(m, cur, to));
                    return edits;
                }
                t *= 0.5;
            }
            Vec::new()
        }
        Direction::Raise => {
            let edges: Vec<usize> = (0..n - 1)
                .filter(|&e| segment_of_vertex(snap.nav, e).any(|k| ctx.allowed(k)))
                .filter(|&e| verts[e].distance(verts[e + 1]) > 2.0)
                .collect();
            if edges.is_empty() {
                return Vec::new();
            }
            let e = edges[rng.gen_range(0..edges.len())];
            let (a, b) = (verts[e], verts[e + 1]);
            let k = snap.nav.segment_at(m.line.chainages()[e] + 1e-9);
            let width = snap.nav.segments[k].corridor.map_or(1.0, |c| m.scene.corridors[c].width);
            let side = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let normal = (b - a).normalized().expect("distinct vertices").perp();
            let at = a.midpoint(b) + normal * (side * mag.clamp(0.1, 1.0) * 0.45 * width);
            if edge_blocked(m, a, at) || edge_blocked(m, at, b) || !m.scene.bounds.contains(at) {
                return Vec::new();
            }
            vec![Edit::InsertVertex { index: e + 1, at }]
        }
    }
}

fn size_step(ctx: &OpContext, snap: &Snapshot, dir: Direction, mag: f64, rng: &mut ChaCha8Rng) -> Vec<Edit> {
    let m = snap.morph;
    let cfg = ctx.config;
    let mut corridors: Vec<usize> = ctx
        .allowed_segments(snap.nav)
        .into_iter()
        .filter_map(|k| snap.nav.segments[k].corridor)
        .collect();
    corridors.sort_unstable();
    corridors.dedup();
    if corridors.is_empty() {
        return Vec::new();
    }
    let cs = ctx.constraints;
    let (lo_w, hi_w) = (cfg.size_width_band[0], cfg.size_width_band[1]);
    let (lo_h, hi_h) = (cfg.size_height_band[0], cfg.size_height_band[1]);
    let t = mag.clamp(0.05, 1.0);
    let (ci, width, height) = match dir {
        Direction::Lower => {
            let dev = |i: usize| {
                let c = &m.scene.corridors[i];
                crate::scale::band_deviation(c.width, cfg.size_width_band)
                    .max(crate::scale::band_deviation(c.height, cfg.size_height_band))
            };
            let mut order: Vec<usize> = corridors.into_iter().filter(|&i| dev(i) > 0.0).collect();
            order.sort_by(|&a, &b| dev(b).total_cmp(&dev(a)).then(a.cmp(&b)));
            if order.is_empty() {
                return Vec::new();
            }
            let ci = order[pick_front(order.len(), rng)];
            let c = &m.scene.corridors[ci];
            let toward = |x: f64, lo: f64, hi: f64| {
                let goal = x.clamp(lo, hi);
                let y = x + (goal - x) * t;
                if (y - goal).abs() < 0.05 { goal } else { y }
            };
            (ci, toward(c.width, lo_w, hi_w), toward(c.height, lo_h, hi_h))
        }
        Direction::Raise => {
            let ci = corridors[rng.gen_range(0..corridors.len())];
            let c = &m.scene.corridors[ci];
            match rng.gen_range(0..3) {
                0 => (ci, c.width * (1.0 - 0.3 * t), c.height),
                1 => (ci, c.width, c.height * (1.0 - 0.2 * t)),
                _ => (ci, c.width * (1.0 + 0.5 * t), c.height),
            }
        }
    };
    let c = &m.scene.corridors[ci];
    let width = width.clamp(cs.min_width, cs.max_width);
    let height = height.max(0.5);
    if (width - c.width).abs() < 1e-9 && (height - c.height).abs() < 1e-9 {
        return Vec::new();
    }
    vec![Edit::ResizeCorridor { corridor: c.id.clone(), width, height }]
}

/// Extent of a polygon along its longest edge direction.
fn principal_extent(poly: &Polygon) -> (Point2, f64, f64) {
    let (a, b) = poly
        .edges()
        .max_by(|x, y| x.0.distance(x.1).total_cmp(&y.0.distance(y.1)))
        .expect("polygon has edges");
    let d = (b - a).normalized().expect("non-degenerate edge");
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &p in poly.ring() {
        lo = lo.min(p.dot(d));
        hi = hi.max(p.dot(d));
    }
    (d, lo, hi)
}

fn sight_blocks(poly: &Polygon, lines: &[(Point2, Point2)]) -> usize {
    lines.iter().filter(|&&(a, b)| segment_polygon_distance(a, b, poly) <= 1e-9).count()
}

fn visibility_step(ctx: &OpContext, snap: &Snapshot, dir: Direction, mag: f64, rng: &mut ChaCha8Rng) -> Vec<Edit> {
    let m = snap.morph;
    let bands = scope_bands(ctx, snap);
    let scoped = |w: &Wall| ctx.segments.is_none() || bands.iter().any(|b| b.bbox.overlaps(&w.footprint.bbox()));
    let end = m.line.last();
    let lines: Vec<(Point2, Point2)> = vantage_points(snap.nav, ctx.config.sample_spacing)
        .into_iter()
        .filter(|&(s, _)| ctx.allowed(snap.nav.segment_at(s)))
        .map(|(_, p)| (p, end))
        .collect();
    let t = mag.clamp(0.05, 1.0);
    match dir {
        Direction::Lower => {
            let mut blocking: Vec<(usize, usize)> = m
                .scene
                .walls
                .iter()
                .enumerate()
                .filter(|(_, w)| scoped(w))
                .map(|(i, w)| (sight_blocks(&w.footprint, &lines), i))
                .filter(|&(c, _)| c > 0)
                .collect();
            blocking.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
            if blocking.is_empty() {
                return Vec::new();
            }
            let wall = &m.scene.walls[blocking[pick_front(blocking.len(), rng)].1];
            let (d, lo, hi) = principal_extent(&wall.footprint);
            let cut = (0.25 + 0.5 * t) * (hi - lo);
            if hi - lo - cut < 0.3 {
                return vec![Edit::RemoveWall { wall: wall.id.clone() }];
            }
            // Trim whichever end frees more sight lines.
            let options = [(d * (lo + cut), d), (d * (hi - cut), -d)];
            let mut best: Option<(usize, Polygon)> = None;
            for (origin, normal) in options {
                let ring = crate::geometry::clip_half_plane(wall.footprint.ring(), origin, normal);
                let Ok(poly) = Polygon::new(ring) else { continue };
                let blocked = sight_blocks(&poly, &lines);
                if best.as_ref().is_none_or(|(b, _)| blocked < *b) {
                    best = Some((blocked, poly));
                }
            }
            match best {
                Some((_, footprint)) => vec![Edit::SetWall { wall: wall.id.clone(), footprint }],
                None => vec![Edit::RemoveWall { wall: wall.id.clone() }],
            }
        }
        Direction::Raise => {
            let walls: Vec<usize> = (0..m.scene.walls.len()).filter(|&i| scoped(&m.scene.walls[i])).collect();
            if !walls.is_empty() && rng.gen_bool(0.5) {
                let wall = &m.scene.walls[walls[rng.gen_range(0..walls.len())]];
                let (d, lo, hi) = principal_extent(&wall.footprint);
                let ext = 0.5 + 2.0 * t;
                let factor = (hi - lo + ext) / (hi - lo);
                let anchor = if rng.gen_bool(0.5) { lo } else { hi };
                // Stretch along d about the anchor, keeping the cross-section.
                let ring: Vec<Point2> = wall
                    .footprint
                    .ring()
                    .iter()
                    .map(|&p| {
                        let s = p.dot(d);
                        p + d * ((s - anchor) * (factor - 1.0))
                    })
                    .collect();
                let Ok(poly) = Polygon::new(ring) else { return Vec::new() };
                if !in_bounds(m, &poly) || !clear_of_path(&m.line, &poly, 0.05) {
                    return Vec::new();
                }
                return vec![Edit::SetWall { wall: wall.id.clone(), footprint: poly }];
            }
            // Baffle: a short partition standing out from the band edge.
            let segs = ctx.allowed_segments(snap.nav);
            let k = segs[rng.gen_range(0..segs.len())];
            let seg = &snap.nav.segments[k];
            let width = seg.corridor.map_or(1.0, |c| m.scene.corridors[c].width);
            let s = rng.gen_range(seg.start_chainage..seg.end_chainage);
            let here = m.line.point_at(s);
            let ahead = m.line.point_at((s + 0.1).min(m.line.length()));
            let behind = m.line.point_at((s - 0.1).max(0.0));
            let Some(tangent) = (ahead - behind).normalized() else { return Vec::new() };
            let side = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let normal = tangent.perp() * side;
            let start = here + normal * (0.5 * width + 0.05);
            let stop = start + normal * (1.0 + 2.0 * t);
            let Ok(poly) = Polygon::band(start, stop, 0.2) else { return Vec::new() };
            if !placeable(m, &poly, 0.05, None) {
                return Vec::new();
            }
            let id = fresh_id(m.scene.walls.iter().map(|w| w.id.clone()), "baffle-");
            vec![Edit::InsertWall { wall: Wall::new(id, poly) }]
        }
    }
}

fn translate_to(poly: &Polygon, from: Point2, to: Point2) -> Polygon {
    poly.translated(to - from)
}

fn scope_axis(ctx: &OpContext, snap: &Snapshot, rng: &mut ChaCha8Rng) -> Option<Axis> {
    let sym = &snap.report.profile.symmetry;
    match ctx.segments {
        None => sym.best_axis,
        Some(segs) => {
            let k = segs[rng.gen_range(0..segs.len())];
            sym.per_segment_axes.get(k).copied().flatten()
        }
    }
}

fn symmetry_step(ctx: &OpContext, snap: &Snapshot, dir: Direction, mag: f64, rng: &mut ChaCha8Rng) -> Vec<Edit> {
    let m = snap.morph;
    let bands = scope_bands(ctx, snap);
    let scoped = scoped_obstacles(ctx, snap, &bands);
    if scoped.is_empty() {
        return Vec::new();
    }
    let obs = &m.scene.obstacles;
    match dir {
        Direction::Lower => {
            let Some(axis) = scope_axis(ctx, snap, rng) else { return Vec::new() };
            let near: Vec<usize> = (0..obs.len())
                .filter(|&i| {
                    let c = obs[i].footprint.centroid();
                    bands.iter().any(|b| b.contains(c))
                })
                .collect();
            // Mismatch of each movable object: distance from its mirror image
            // to the closest centroid of any nearby object (itself included).
            let mismatch = |i: usize| -> (f64, usize) {
                let r = axis.reflect(obs[i].footprint.centroid());
                near.iter()
                    .map(|&j| (r.distance(obs[j].footprint.centroid()), j))
                    .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
                    .unwrap_or((f64::INFINITY, i))
            };
            let mut cands: Vec<(f64, usize, usize)> = scoped
                .iter()
                .map(|&i| {
                    let (d, j) = mismatch(i);
                    (d, i, j)
                })
                .filter(|c| c.0 > 1e-6)
                .collect();
            cands.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            if cands.is_empty() {
                return Vec::new();
            }
            let (_, i, j) = cands[pick_front(cands.len(), rng)];
            let mirror = axis.reflect_polygon(&obs[i].footprint);
            // Move the partner onto the mirror image when it is movable and
            // reasonably close, otherwise add a mirrored copy or remove the
            // unmatched object.
            if j != i && ctx.constraints.is_movable(&obs[j]) && placeable(m, &mirror, 0.0, Some(&obs[j].id)) {
                return vec![Edit::MoveObstacle { obstacle: obs[j].id.clone(), footprint: mirror }];
            }
            if rng.gen_bool(0.5) && placeable(m, &mirror, 0.0, None) {
                let mut copy = obs[i].clone();
                copy.id = fresh_id(obs.iter().map(|o| o.id.clone()), "mirror-");
                copy.footprint = mirror;
                return vec![Edit::InsertObstacle { obstacle: copy }];
            }
            vec![Edit::RemoveObstacle { obstacle: obs[i].id.clone() }]
        }
        Direction::Raise => {
            let i = scoped[rng.gen_range(0..scoped.len())];
            let angle = rng.gen_range(0.0..std::f64::consts::TAU);
            let len = 0.3 + 0.9 * mag.clamp(0.0, 1.0);
            let offset = Point2::new(angle.cos(), angle.sin()) * len;
            let moved = obs[i].footprint.translated(offset);
            if !placeable(m, &moved, 0.0, Some(&obs[i].id)) {
                return Vec::new();
            }
            vec![Edit::MoveObstacle { obstacle: obs[i].id.clone(), footprint: moved }]
        }
    }
}

fn clutter_step(ctx: &OpContext, snap: &Snapshot, dir: Direction, mag: f64, rng: &mut ChaCha8Rng) -> Vec<Edit> {
    let m = snap.morph;
    let bands = scope_bands(ctx, snap);
    let count = 1 + (mag.clamp(0.0, 1.0) * 4.0).floor() as usize;
    match dir {
        Direction::Lower => {
            let mut scoped = scoped_obstacles(ctx, snap, &bands);
            scoped.sort_by(|&a, &b| {
                let (oa, ob) = (&m.scene.obstacles[a], &m.scene.obstacles[b]);
                ob.footprint.area().total_cmp(&oa.footprint.area()).then(oa.id.cmp(&ob.id))
            });
            let floor = ctx.constraints.min_objects;
            let room = m.scene.obstacles.len().saturating_sub(floor);
            let mut edits = Vec::new();
            for _ in 0..count.min(room) {
                if scoped.is_empty() {
                    break;
                }
                let i = scoped.remove(pick_front(scoped.len(), rng));
                edits.push(Edit::RemoveObstacle { obstacle: m.scene.obstacles[i].id.clone() });
            }
            edits
        }
        Direction::Raise => {
            let room = ctx.constraints.max_objects.saturating_sub(m.scene.obstacles.len());
            let segs = ctx.allowed_segments(snap.nav);
            let mut trial = m.clone();
            let mut edits = Vec::new();
            for _ in 0..count.min(room) {
                for _attempt in 0..8 {
                    let k = segs[rng.gen_range(0..segs.len())];
                    if let Some(o) = unit_object(&trial, snap.nav, k, rng) {
                        let e = Edit::InsertObstacle { obstacle: o };
                        trial.apply(&e).expect("fresh id");
                        edits.push(e);
                        break;
                    }
                }
            }
            edits
        }
    }
}

/// A unit object beside segment `k`, clear of the path, or `None` if the
/// sampled spot is taken.
fn unit_object(m: &Morphology, nav: &NavPath, k: usize, rng: &mut ChaCha8Rng) -> Option<Obstacle> {
    let seg = &nav.segments[k];
    let width = seg.corridor.map_or(2.0, |c| m.scene.corridors[c].width);
    let (s0, s1) = (seg.start_chainage + 0.6, seg.end_chainage - 0.6);
    if s1 <= s0 {
        return None;
    }
    let s = rng.gen_range(s0..s1);
    let here = m.line.point_at(s);
    let tangent = (m.line.point_at((s + 0.1).min(m.line.length())) - m.line.point_at((s - 0.1).max(0.0))).normalized()?;
    let normal = tangent.perp() * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let half = 0.5 * UNIT_OBJECT;
    let inner = INSERT_CLEARANCE + half + 0.01;
    let outer = (0.5 * width).max(inner + 0.05);
    let c = here + normal * rng.gen_range(inner..outer);
    let ring = [(-half, -half), (half, -half), (half, half), (-half, half)]
        .iter()
        .map(|&(u, v)| c + tangent * u + normal * v)
        .collect();
    let poly = Polygon::new(ring).ok()?;
    if !placeable(m, &poly, INSERT_CLEARANCE, None) {
        return None;
    }
    let id = fresh_id(m.scene.obstacles.iter().map(|o| o.id.clone()), "unit-");
    Obstacle::new(id, poly, 1.0).ok()
}

fn best_fit(points: &[Point2], tol: f64) -> Option<TemplateFit> {
    let mut best: Option<TemplateFit> = None;
    for f in fit_templates(points, tol).into_iter().flatten() {
        if best.is_none_or(|b| f.inliers > b.inliers) {
            best = Some(f);
        }
    }
    best
}

fn order_step(ctx: &OpContext, snap: &Snapshot, dir: Direction, mag: f64, rng: &mut ChaCha8Rng) -> Vec<Edit> {
    let m = snap.morph;
    let tol = ctx.config.residual_tolerance;
    let bands = scope_bands(ctx, snap);
    let whole = path_band(&bands);
    let obs = &m.scene.obstacles;
    let members: Vec<usize> = (0..obs.len()).filter(|&i| whole.contains(obs[i].footprint.centroid())).collect();
    let pts: Vec<Point2> = members.iter().map(|&i| obs[i].footprint.centroid()).collect();
    debug_assert_eq!(pts.len(), centroids_in(&m.scene, &whole).len());
    if pts.len() < 2 {
        return Vec::new();
    }
    let Some(fit) = best_fit(&pts, tol) else { return Vec::new() };
    let count = 1 + (mag.clamp(0.0, 1.0) * 4.0).floor() as usize;
    match dir {
        Direction::Lower => {
            let mut outliers: Vec<(f64, usize)> = members
                .iter()
                .zip(&pts)
                .filter(|(&i, _)| ctx.constraints.is_movable(&obs[i]))
                .map(|(&i, &c)| (fit.instance.residual(c), i))
                .filter(|&(r, _)| r > tol)
                .collect();
            outliers.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut trial = m.clone();
            let mut edits = Vec::new();
            for &(_, i) in &outliers {
                if edits.len() == count {
                    break;
                }
                let c = obs[i].footprint.centroid();
                let moved = translate_to(&obs[i].footprint, c, fit.instance.snap(c));
                if placeable(&trial, &moved, 0.0, Some(&obs[i].id)) {
                    let e = Edit::MoveObstacle { obstacle: obs[i].id.clone(), footprint: moved };
                    trial.apply(&e).expect("known obstacle");
                    edits.push(e);
                }
            }
            edits
        }
        Direction::Raise => {
            let inliers: Vec<usize> = members
                .iter()
                .zip(&pts)
                .filter(|(&i, &c)| ctx.constraints.is_movable(&obs[i]) && fit.instance.residual(c) <= tol)
                .map(|(&i, _)| i)
                .collect();
            if inliers.is_empty() {
                return Vec::new();
            }
            let i = inliers[rng.gen_range(0..inliers.len())];
            let angle = rng.gen_range(0.0..std::f64::consts::TAU);
            let offset = Point2::new(angle.cos(), angle.sin()) * (tol * (1.5 + 2.0 * mag.clamp(0.0, 1.0)));
            let moved = obs[i].footprint.translated(offset);
            if !placeable(m, &moved, 0.0, Some(&obs[i].id)) {
                return Vec::new();
            }
            vec![Edit::MoveObstacle { obstacle: obs[i].id.clone(), footprint: moved }]
        }
    }
}
