use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{NavPath, Scene};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeMeasure {
    pub mean_width: f64,
    pub mean_height: f64,
    pub total_length: f64,
    /// (width, height) of each segment's corridor.
    pub per_segment: Vec<(f64, f64)>,
}

/// Length-weighted corridor dimensions along the path.
pub fn size_metric(scene: &Scene, path: &NavPath) -> Result<SizeMeasure> {
    let mut per_segment = Vec::with_capacity(path.segments.len());
    let (mut w, mut h, mut total) = (0.0, 0.0, 0.0);
    for (i, seg) in path.segments.iter().enumerate() {
        let c = &scene.corridors[path.corridor_of(i)?];
        let len = seg.length();
        w += c.width * len;
        h += c.height * len;
        total += len;
        per_segment.push((c.width, c.height));
    }
    Ok(SizeMeasure {
        mean_width: w / total,
        mean_height: h / total,
        total_length: path.line.length(),
        per_segment,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::geometry::{CorridorSegment, Point2, Polyline, Rect};

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    fn scene(w1: f64, w2: f64) -> Scene {
        Scene::new(Rect::new(p(-5., -5.), p(25., 25.)).unwrap())
            .with_corridor(CorridorSegment::new("a", p(0., 0.), p(10., 0.), w1, 3.0).unwrap())
            .with_corridor(CorridorSegment::new("b", p(10., 0.), p(10., 10.), w2, 3.0).unwrap())
    }

    fn l_path(s: &Scene) -> NavPath {
        NavPath::new(Polyline::new(vec![p(0., 0.), p(10., 0.), p(10., 10.)]).unwrap(), s, 15.0, None).unwrap()
    }

    #[test]
    fn equal_dims() {
        let s = scene(2.0, 2.0);
        let m = size_metric(&s, &l_path(&s)).unwrap();
        assert_eq!((m.mean_width, m.mean_height, m.total_length), (2.0, 3.0, 20.0));
    }

    #[test]
    fn equal_length_weighting() {
        let s = scene(2.0, 4.0);
        assert_eq!(size_metric(&s, &l_path(&s)).unwrap().mean_width, 3.0);
    }

    #[test]
    fn single_segment_is_identity() {
        let s = Scene::new(Rect::new(p(-5., -5.), p(25., 25.)).unwrap())
            .with_corridor(CorridorSegment::new("a", p(0., 0.), p(10., 0.), 2.5, 2.7).unwrap());
        let path = NavPath::new(Polyline::new(vec![p(0., 0.), p(10., 0.)]).unwrap(), &s, 15.0, None).unwrap();
        let m = size_metric(&s, &path).unwrap();
        assert_eq!((m.mean_width, m.mean_height), (2.5, 2.7));
    }

    #[test]
    fn unattached_segment_is_an_error() {
        let s = Scene::new(Rect::new(p(-5., -5.), p(25., 25.)).unwrap());
        let path = NavPath::new(Polyline::new(vec![p(0., 0.), p(10., 0.)]).unwrap(), &s, 15.0, None).unwrap();
        assert_eq!(size_metric(&s, &path).unwrap_err(), Error::MissingCorridor { segment: 0 });
    }
}
