//! Synthetic reference morphologies shipped with the engine.
//!
//! The JSON copies in `fixtures/` are generated from these builders and a
//! test keeps the two in sync.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::document::{NamedPath, SceneDocument};
use crate::geometry::{CorridorSegment, Obstacle, Point2, Polygon, Polyline, Rect, Scene, Wall};

/// A scene plus one named navigation path through it.
#[derive(Clone, Debug, PartialEq)]
pub struct Fixture {
    pub name: &'static str,
    pub scene: Scene,
    pub path_name: String,
    pub path: Polyline,
}

impl Fixture {
    /// The fixture as a scene document with a single named path.
    pub fn document(&self) -> SceneDocument {
        let path = NamedPath { name: self.path_name.clone(), line: self.path.clone(), corridors: None };
        SceneDocument::new(self.scene.clone(), vec![path])
    }
}

pub const FIXTURE_NAMES: [&str; 5] = ["empty_corridor", "l_corridor", "zigzag", "old_parkland", "new_parkland"];

pub fn by_name(name: &str) -> Option<Fixture> {
    Some(match name {
        "empty_corridor" => empty_corridor(),
        "l_corridor" => l_corridor(),
        "zigzag" => zigzag(),
        "old_parkland" => old_parkland(),
        "new_parkland" => new_parkland(),
        _ => return None,
    })
}

pub fn all() -> Vec<Fixture> {
    FIXTURE_NAMES.iter().map(|n| by_name(n).expect("known fixture")).collect()
}

fn p(x: f64, y: f64) -> Point2 {
    Point2::new(x, y)
}

fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Polygon {
    Polygon::rectangle(p(x0, y0), p(x1, y1)).expect("fixture rectangle")
}

fn line(pts: &[(f64, f64)]) -> Polyline {
    Polyline::new(pts.iter().map(|&(x, y)| p(x, y)).collect()).expect("fixture path")
}

/// One corridor per polyline edge, named `c0`, `c1`, ...
fn corridors_along(scene: &mut Scene, path: &Polyline, dims: &[(f64, f64)]) {
    for (i, w) in path.vertices().windows(2).enumerate() {
        let (width, height) = dims[i.min(dims.len() - 1)];
        scene
            .corridors
            .push(CorridorSegment::new(format!("c{i}"), w[0], w[1], width, height).expect("fixture corridor"));
    }
}

/// Mitred offset of a polyline to its left (`d > 0`) or right.
fn offset(path: &[Point2], d: f64) -> Vec<Point2> {
    let normals: Vec<Point2> = path
        .windows(2)
        .map(|w| (w[1] - w[0]).normalized().expect("distinct vertices").perp())
        .collect();
    (0..path.len())
        .map(|i| {
            let n = if i == 0 {
                normals[0]
            } else if i == path.len() - 1 {
                normals[i - 1]
            } else {
                let (a, b) = (normals[i - 1], normals[i]);
                (a + b) * (1.0 / (1.0 + a.dot(b)))
            };
            path[i] + n * d
        })
        .collect()
}

/// Side walls of thickness 0.2 whose inner faces sit `half_width` from the
/// path on both sides.
fn side_walls(scene: &mut Scene, path: &Polyline, half_width: f64) {
    for (side, d) in [("l", half_width + 0.1), ("r", -(half_width + 0.1))] {
        for (i, w) in offset(path.vertices(), d).windows(2).enumerate() {
            let fp = Polygon::band(w[0], w[1], 0.2).expect("fixture wall");
            scene.walls.push(Wall::new(format!("w{side}{i}"), fp));
        }
    }
}

/// Straight 20 m corridor, 3 m wide and 3 m high, nothing in it.
pub fn empty_corridor() -> Fixture {
    let path = line(&[(0., 0.), (20., 0.)]);
    let mut scene = Scene::new(Rect::new(p(-2., -4.), p(22., 4.)).unwrap());
    corridors_along(&mut scene, &path, &[(3.0, 3.0)]);
    side_walls(&mut scene, &path, 1.5);
    Fixture { name: "empty_corridor", scene, path_name: "main".into(), path }
}

/// Two 10 m legs at a right angle, 2 m wide, walled so the corner hides
/// the end from most of the first leg.
pub fn l_corridor() -> Fixture {
    let path = line(&[(0., 0.), (10., 0.), (10., 10.)]);
    let mut scene = Scene::new(Rect::new(p(-2., -3.), p(13., 12.)).unwrap());
    corridors_along(&mut scene, &path, &[(2.0, 3.0)]);
    side_walls(&mut scene, &path, 1.0);
    Fixture { name: "l_corridor", scene, path_name: "main".into(), path }
}

/// Four turns totalling 270 degrees, open plan.
pub fn zigzag() -> Fixture {
    let path = line(&[(0., 0.), (8., 0.), (14., 6.), (20., 0.), (26., 6.), (34., 6.)]);
    let mut scene = Scene::new(Rect::new(p(-3., -4.), p(37., 10.)).unwrap());
    corridors_along(&mut scene, &path, &[(2.4, 3.0)]);
    Fixture { name: "zigzag", scene, path_name: "main".into(), path }
}

/// Long, narrow and low corridor with three right-angle turns and
/// irregularly placed equipment along both sides.
pub fn old_parkland() -> Fixture {
    let path = line(&[(0., 0.), (25., 0.), (25., 20.), (48., 20.), (48., 32.)]);
    let mut scene = Scene::new(Rect::new(p(-3., -3.), p(51., 35.)).unwrap());
    corridors_along(&mut scene, &path, &[(1.4, 2.3)]);
    side_walls(&mut scene, &path, 0.7);

    let mut rng = ChaCha8Rng::seed_from_u64(0x01d9a4c);
    let verts = path.vertices();
    let mut n = 0;
    for (leg, w) in verts.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        let len = a.distance(b);
        let dir = (b - a) * (1.0 / len);
        let left = dir.perp();
        // Keep clear of the corner squares so footprints stay inside the leg.
        let mut s = 1.2 + rng.gen_range(0.0..0.8);
        while s < len - 2.0 {
            let along = rng.gen_range(0.9..2.2_f64).min(len - 0.9 - s);
            let depth = rng.gen_range(0.5..0.65);
            let side = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let inner = 0.7 - depth;
            let c0 = a + dir * s + left * (side * inner);
            let c1 = a + dir * (s + along) + left * (side * 0.7);
            let ring = vec![c0, a + dir * (s + along) + left * (side * inner), c1, a + dir * s + left * (side * 0.7)];
            let fp = Polygon::new(ring).expect("fixture obstacle");
            let mut o = Obstacle::new(format!("eq{n}"), fp, rng.gen_range(0.9..1.8)).unwrap();
            if leg == 1 && n % 3 == 0 {
                o = o.with_tag("structural").immovable();
            }
            scene.obstacles.push(o);
            n += 1;
            s += along + rng.gen_range(0.05..0.3);
        }
    }
    Fixture { name: "old_parkland", scene, path_name: "main".into(), path }
}

/// Comfortable corridors either side of a lobby (segment 1) furnished with
/// mirrored seating on a regular grid.
pub fn new_parkland() -> Fixture {
    let path = line(&[(0., 0.), (20., 0.), (34., 7.), (54., 7.)]);
    let mut scene = Scene::new(Rect::new(p(-3., -6.), p(57., 13.)).unwrap());
    corridors_along(&mut scene, &path, &[(2.6, 2.8), (6.0, 5.0), (2.6, 2.8)]);
    // Corridor walls on the two narrow legs only; the lobby is open.
    for (id, r) in [
        ("wa", rect(0., 1.3, 20., 1.5)),
        ("wb", rect(0., -1.5, 20., -1.3)),
        ("wc", rect(34., 8.3, 54., 8.5)),
        ("wd", rect(34., 5.5, 54., 5.7)),
    ] {
        scene.walls.push(Wall::new(id, r));
    }
    let (a, b) = (p(20., 0.), p(34., 7.));
    let len = a.distance(b);
    let dir = (b - a) * (1.0 / len);
    let left = dir.perp();
    let mut n = 0;
    for k in 0..4 {
        for side in [-1.0, 1.0] {
            let c = a + dir * (3.0 + 3.0 * k as f64) + left * (side * 2.0);
            let ring = [(-0.8, -0.5), (0.8, -0.5), (0.8, 0.5), (-0.8, 0.5)]
                .iter()
                .map(|&(u, v)| c + dir * u + left * v)
                .collect();
            let fp = Polygon::new(ring).expect("fixture seat");
            scene.obstacles.push(Obstacle::new(format!("seat{n}"), fp, 0.9).unwrap().with_tag("seating"));
            n += 1;
        }
    }
    for (i, &(x, y, s)) in [(5.0, 0.85, 0.5), (12.5, -0.9, 0.6), (41.0, 7.9, 0.5), (47.5, 6.1, 0.6)]
        .iter()
        .enumerate()
    {
        let fp = Polygon::square(p(x, y), s).unwrap();
        scene.obstacles.push(Obstacle::new(format!("bench{i}"), fp, 0.5).unwrap());
    }
    Fixture { name: "new_parkland", scene, path_name: "main".into(), path }
}
