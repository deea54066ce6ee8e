use crate::error::{Error, Result};
use crate::geometry::{NavPath, Point2, Polygon, Rect, RegionSet, Scene};

/// Widthwise envelope of a stretch of the path: one rectangle per polyline
/// edge, sized by the corridor the segment belongs to.
#[derive(Clone, Debug)]
pub struct Band {
    pub rects: Vec<Polygon>,
    pub bbox: Rect,
}

impl Band {
    fn from_rects(rects: Vec<Polygon>) -> Self {
        let bbox = Rect::enclosing(rects.iter().flat_map(|r| r.ring().iter().copied()));
        Self { rects, bbox }
    }

    pub fn contains(&self, p: Point2) -> bool {
        self.bbox.contains(p) && self.rects.iter().any(|r| r.contains(p))
    }

    pub fn area(&self) -> f64 {
        let mut region = RegionSet::new(1);
        for r in &self.rects {
            region.add_polygon(0, r.ring());
        }
        region.area_where(|m| m[0])
    }

    pub fn vertices(&self) -> impl Iterator<Item = Point2> + '_ {
        self.rects.iter().flat_map(|r| r.ring().iter().copied())
    }
}

pub fn segment_band(scene: &Scene, path: &NavPath, segment: usize) -> Result<Band> {
    let corridor = &scene.corridors[path.corridor_of(segment)?];
    let rects = path
        .segment_vertices(segment)
        .windows(2)
        .map(|w| Polygon::band(w[0], w[1], corridor.width))
        .collect::<Result<Vec<_>>>()?;
    Ok(Band::from_rects(rects))
}

pub fn segment_bands(scene: &Scene, path: &NavPath) -> Result<Vec<Band>> {
    let bands = (0..path.segments.len())
        .map(|i| segment_band(scene, path, i))
        .collect::<Result<Vec<_>>>()?;
    if bands.is_empty() {
        return Err(Error::DegenerateGeometry("path has no segments".into()));
    }
    Ok(bands)
}

pub fn path_band(bands: &[Band]) -> Band {
    Band::from_rects(bands.iter().flat_map(|b| b.rects.iter().cloned()).collect())
}

/// Indices of obstacles whose footprint bbox overlaps the band's bbox.
pub fn obstacles_near(scene: &Scene, band: &Band) -> Vec<usize> {
    scene
        .obstacles
        .iter()
        .enumerate()
        .filter(|(_, o)| o.footprint.bbox().overlaps(&band.bbox))
        .map(|(i, _)| i)
        .collect()
}
