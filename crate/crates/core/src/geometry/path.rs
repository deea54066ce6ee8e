use serde::{Deserialize, Serialize};

use super::{Point2, Polyline, Scene, METRIC_EPS};
use crate::error::{Error, Result};

/// Inclusive vertex range of one turn-delimited stretch of a polyline.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentSpan {
    pub start: usize,
    pub end: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segmentation {
    pub spans: Vec<SegmentSpan>,
    /// Heading change at every vertex in degrees; 0 at both ends.
    pub turn_angles: Vec<f64>,
}

impl Segmentation {
    pub fn turn_count(&self) -> usize {
        self.spans.len() - 1
    }
}

/// Heading change at vertex `i` in degrees, in [0, 180].
pub(crate) fn turn_angle(prev: Point2, at: Point2, next: Point2) -> f64 {
    let u = at - prev;
    let v = next - at;
    u.cross(v).abs().atan2(u.dot(v)).to_degrees()
}

/// Splits a polyline at every vertex whose heading change exceeds
/// `turn_threshold` degrees.
pub fn segment_path(line: &Polyline, turn_threshold: f64) -> Result<Segmentation> {
    if !(turn_threshold > 0.0 && turn_threshold < 180.0) {
        return Err(Error::InvalidConfig(format!(
            "turn threshold must lie in (0, 180) degrees, got {turn_threshold}"
        )));
    }
    let v = line.vertices();
    let n = v.len();
    let mut turn_angles = vec![0.0; n];
    for i in 1..n - 1 {
        turn_angles[i] = turn_angle(v[i - 1], v[i], v[i + 1]);
    }
    let mut spans = Vec::new();
    let mut start = 0;
    for (i, &angle) in turn_angles.iter().enumerate().take(n - 1).skip(1) {
        if angle > turn_threshold {
            spans.push(SegmentSpan { start, end: i });
            start = i;
        }
    }
    spans.push(SegmentSpan { start, end: n - 1 });
    Ok(Segmentation { spans, turn_angles })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSegment {
    pub span: SegmentSpan,
    pub start_chainage: f64,
    pub end_chainage: f64,
    /// Index into `Scene::corridors`.
    pub corridor: Option<usize>,
}

impl PathSegment {
    pub fn length(&self) -> f64 {
        self.end_chainage - self.start_chainage
    }
}

/// Navigation path: the polyline plus its turn-delimited segments, each
/// associated with the corridor it runs through.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NavPath {
    pub line: Polyline,
    pub turn_threshold: f64,
    pub turn_angles: Vec<f64>,
    pub segments: Vec<PathSegment>,
    /// Corridor restriction the path was built with, kept for resegmentation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corridor_candidates: Option<Vec<usize>>,
}

impl NavPath {
    /// Segments `line` and attaches every segment to the nearest corridor
    /// whose band contains the segment's midpoint. `candidates` restricts the
    /// corridors considered (indices into `scene.corridors`).
    pub fn new(line: Polyline, scene: &Scene, turn_threshold: f64, candidates: Option<&[usize]>) -> Result<Self> {
        let seg = segment_path(&line, turn_threshold)?;
        let chain = line.chainages();
        let all: Vec<usize> = (0..scene.corridors.len()).collect();
        let pool = candidates.unwrap_or(&all);
        let segments = seg
            .spans
            .iter()
            .map(|&span| {
                let (s0, s1) = (chain[span.start], chain[span.end]);
                let mid = line.point_at(0.5 * (s0 + s1));
                let corridor = pool
                    .iter()
                    .copied()
                    .filter_map(|ci| {
                        let c = scene.corridors.get(ci)?;
                        let d = c.distance_to(mid);
                        (d <= 0.5 * c.width + METRIC_EPS).then_some((d, ci))
                    })
                    .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
                    .map(|(_, ci)| ci);
                PathSegment { span, start_chainage: s0, end_chainage: s1, corridor }
            })
            .collect();
        Ok(Self {
            line,
            turn_threshold,
            turn_angles: seg.turn_angles,
            segments,
            corridor_candidates: candidates.map(<[usize]>::to_vec),
        })
    }

    /// Same polyline and corridor restriction, new turn threshold.
    pub fn resegment(&self, scene: &Scene, turn_threshold: f64) -> Result<Self> {
        Self::new(self.line.clone(), scene, turn_threshold, self.corridor_candidates.as_deref())
    }

    /// Same corridor restriction, new polyline.
    pub fn with_line(&self, scene: &Scene, line: Polyline) -> Result<Self> {
        Self::new(line, scene, self.turn_threshold, self.corridor_candidates.as_deref())
    }

    pub fn length(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.end_chainage)
    }

    pub fn segment_vertices(&self, index: usize) -> &[Point2] {
        let span = self.segments[index].span;
        &self.line.vertices()[span.start..=span.end]
    }

    /// Index of the segment containing `chainage`; boundaries belong to the
    /// later segment, the path end to the last one.
    pub fn segment_at(&self, chainage: f64) -> usize {
        self.segments
            .iter()
            .rposition(|s| chainage >= s.start_chainage)
            .unwrap_or(0)
    }

    pub fn corridor_of(&self, segment: usize) -> Result<usize> {
        self.segments[segment].corridor.ok_or(Error::MissingCorridor { segment })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(pts: &[(f64, f64)]) -> Polyline {
        Polyline::new(pts.iter().map(|&(x, y)| Point2::new(x, y)).collect()).unwrap()
    }

    #[test]
    fn collinear_path_has_one_segment() {
        let s = segment_path(&line(&[(0., 0.), (5., 0.), (10., 0.)]), 15.0).unwrap();
        assert_eq!(s.spans.len(), 1);
        assert_eq!(s.turn_count(), 0);
    }

    #[test]
    fn l_path_splits_at_corner() {
        let s = segment_path(&line(&[(0., 0.), (10., 0.), (10., 10.)]), 15.0).unwrap();
        assert_eq!(s.spans, vec![SegmentSpan { start: 0, end: 1 }, SegmentSpan { start: 1, end: 2 }]);
        assert!((s.turn_angles[1] - 90.0).abs() < 1e-12);
    }

    #[test]
    fn gentle_arc_stays_one_segment() {
        let mut pts = vec![(0.0, 0.0)];
        let mut heading: f64 = 0.0;
        let (mut x, mut y) = (0.0, 0.0);
        for _ in 0..6 {
            x += 5.0 * heading.to_radians().cos();
            y += 5.0 * heading.to_radians().sin();
            pts.push((x, y));
            heading += 10.0;
        }
        let s = segment_path(&line(&pts), 15.0).unwrap();
        assert_eq!(s.spans.len(), 1);
        for a in &s.turn_angles[1..pts.len() - 1] {
            assert!((a - 10.0).abs() < 1e-9);
        }
    }

    #[test]
    fn threshold_out_of_range() {
        assert!(segment_path(&line(&[(0., 0.), (1., 0.)]), 0.0).is_err());
        assert!(segment_path(&line(&[(0., 0.), (1., 0.)]), 180.0).is_err());
    }
}
