use serde::{Deserialize, Serialize};

use super::band::{obstacles_near, Band};
use crate::error::{Error, Result};
use crate::geometry::{RegionSet, Scene};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClutterMeasure {
    pub coverage_fraction: f64,
    pub per_segment_fractions: Vec<f64>,
    pub per_segment_band_areas: Vec<f64>,
}

/// (covered area, band area) for one band. Overlapping footprints count once.
pub fn band_coverage(scene: &Scene, band: &Band) -> (f64, f64) {
    let mut region = RegionSet::new(2);
    for r in &band.rects {
        region.add_polygon(1, r.ring());
    }
    let band_area = region.area_where(|m| m[1]);
    let near = obstacles_near(scene, band);
    if near.is_empty() {
        return (0.0, band_area);
    }
    for i in near {
        region.add_polygon(0, scene.obstacles[i].footprint.ring());
    }
    (region.area_where(|m| m[0] && m[1]), band_area)
}

pub fn clutter_with_bands(scene: &Scene, bands: &[Band]) -> Result<ClutterMeasure> {
    let mut per_segment_fractions = Vec::with_capacity(bands.len());
    let mut per_segment_band_areas = Vec::with_capacity(bands.len());
    let (mut covered, mut total) = (0.0, 0.0);
    for (i, band) in bands.iter().enumerate() {
        let (c, a) = band_coverage(scene, band);
        if a <= 0.0 {
            return Err(Error::DegenerateGeometry(format!("segment {i} has a zero-area band")));
        }
        per_segment_fractions.push((c / a).clamp(0.0, 1.0));
        per_segment_band_areas.push(a);
        covered += c;
        total += a;
    }
    Ok(ClutterMeasure {
        coverage_fraction: (covered / total).clamp(0.0, 1.0),
        per_segment_fractions,
        per_segment_band_areas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{CorridorSegment, NavPath, Obstacle, Point2, Polygon, Polyline, Rect};
    use crate::metrics::band::segment_bands;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    fn corridor() -> (Scene, NavPath) {
        // 15 m x 2 m band = 30 m^2.
        let scene = Scene::new(Rect::new(p(0., -5.), p(15., 5.)).unwrap())
            .with_corridor(CorridorSegment::new("c", p(0., 0.), p(15., 0.), 2.0, 3.0).unwrap());
        let path = NavPath::new(Polyline::new(vec![p(0., 0.), p(15., 0.)]).unwrap(), &scene, 15.0, None).unwrap();
        (scene, path)
    }

    fn measure(scene: &Scene, path: &NavPath) -> ClutterMeasure {
        clutter_with_bands(scene, &segment_bands(scene, path).unwrap()).unwrap()
    }

    #[test]
    fn no_obstacles() {
        let (s, path) = corridor();
        assert_eq!(measure(&s, &path).coverage_fraction, 0.0);
    }

    #[test]
    fn six_square_meters_inside() {
        let (mut s, path) = corridor();
        for (i, x) in [1.0, 4.0, 7.0].into_iter().enumerate() {
            let fp = Polygon::rectangle(p(x, -0.5), p(x + 2.0, 0.5)).unwrap();
            s.obstacles.push(Obstacle::new(format!("o{i}"), fp, 1.0).unwrap());
        }
        assert!((measure(&s, &path).coverage_fraction - 0.2).abs() < 1e-12);
    }

    #[test]
    fn only_the_inside_part_counts() {
        let (mut s, path) = corridor();
        let fp = Polygon::rectangle(p(2., 0.), p(4., 2.)).unwrap();
        s.obstacles.push(Obstacle::new("half", fp, 1.0).unwrap());
        assert!((measure(&s, &path).coverage_fraction - 2.0 / 30.0).abs() < 1e-12);
    }
}
