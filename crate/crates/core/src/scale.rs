//! Normalisation of raw measures onto [0, 1] complexity scores, binning into
//! classes 1-5, aggregation, and the moderate-class preference curve.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{NavPath, Scene};
use crate::metrics::{compute_profile_cached, AttributeProfile, MetricParams, OrderCache, VisibilityMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attribute {
    Rotation,
    Size,
    Visibility,
    Symmetry,
    Clutter,
    Order,
}

impl Attribute {
    pub const ALL: [Attribute; 6] = [
        Attribute::Rotation,
        Attribute::Size,
        Attribute::Visibility,
        Attribute::Symmetry,
        Attribute::Clutter,
        Attribute::Order,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Attribute::Rotation => "rotation",
            Attribute::Size => "size",
            Attribute::Visibility => "visibility",
            Attribute::Symmetry => "symmetry",
            Attribute::Clutter => "clutter",
            Attribute::Order => "order",
        }
    }

    pub fn direction(self) -> AttributeDirection {
        match self {
            Attribute::Rotation | Attribute::Clutter => AttributeDirection::IncreasesComplexity,
            Attribute::Visibility | Attribute::Symmetry | Attribute::Order => AttributeDirection::DecreasesComplexity,
            Attribute::Size => AttributeDirection::UShaped,
        }
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Attribute {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Attribute::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::UnknownAttribute(s.to_string()))
    }
}

/// How an attribute's raw value relates to complexity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributeDirection {
    IncreasesComplexity,
    DecreasesComplexity,
    UShaped,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttributeWeights {
    pub rotation: f64,
    pub size: f64,
    pub visibility: f64,
    pub symmetry: f64,
    pub clutter: f64,
    pub order: f64,
}

impl Default for AttributeWeights {
    fn default() -> Self {
        Self { rotation: 1.0, size: 1.0, visibility: 1.0, symmetry: 1.0, clutter: 1.0, order: 1.0 }
    }
}

impl AttributeWeights {
    pub fn get(&self, a: Attribute) -> f64 {
        match a {
            Attribute::Rotation => self.rotation,
            Attribute::Size => self.size,
            Attribute::Visibility => self.visibility,
            Attribute::Symmetry => self.symmetry,
            Attribute::Clutter => self.clutter,
            Attribute::Order => self.order,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScaleConfig {
    pub format_version: String,
    /// Accumulated turning (degrees per 100 m of path) that maps to score 1.
    pub rotation_degrees_cap: f64,
    /// Clutter coverage that maps to score 1.
    pub clutter_cap: f64,
    pub size_width_band: [f64; 2],
    pub size_height_band: [f64; 2],
    /// Relative deviation from the comfort band that maps to score 1.
    pub size_deviation_cap: f64,
    /// Lower edges of classes 2..5 on the score axis.
    pub bin_edges: [f64; 4],
    pub turn_threshold: f64,
    pub sample_spacing: f64,
    pub visibility_mode: VisibilityMode,
    pub residual_tolerance: f64,
    pub weights: AttributeWeights,
}

impl Default for ScaleConfig {
    fn default() -> Self {
        Self {
            format_version: "1".into(),
            rotation_degrees_cap: 360.0,
            clutter_cap: 0.5,
            size_width_band: [1.8, 6.0],
            size_height_band: [2.4, 5.0],
            size_deviation_cap: 1.0,
            bin_edges: [0.2, 0.4, 0.6, 0.8],
            turn_threshold: 15.0,
            sample_spacing: 1.0,
            visibility_mode: VisibilityMode::Endpoint,
            residual_tolerance: 0.25,
            weights: AttributeWeights::default(),
        }
    }
}

impl ScaleConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.format_version != "1" {
            return bad(&format!("unsupported config format_version `{}`", self.format_version));
        }
        let e = self.bin_edges;
        if !(e[0] > 0.0 && e.windows(2).all(|w| w[0] < w[1]) && e[3] < 1.0) {
            return bad("bin edges must be strictly increasing within (0, 1)");
        }
        for (name, v) in [
            ("rotation_degrees_cap", self.rotation_degrees_cap),
            ("clutter_cap", self.clutter_cap),
            ("size_deviation_cap", self.size_deviation_cap),
            ("sample_spacing", self.sample_spacing),
            ("residual_tolerance", self.residual_tolerance),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(&format!("{name} must be > 0"));
            }
        }
        for (name, [lo, hi]) in [("size_width_band", self.size_width_band), ("size_height_band", self.size_height_band)] {
            if !(lo > 0.0 && lo < hi && hi.is_finite()) {
                return bad(&format!("{name} must satisfy 0 < low < high"));
            }
        }
        if !(self.turn_threshold > 0.0 && self.turn_threshold < 180.0) {
            return bad("turn_threshold must lie in (0, 180)");
        }
        let ws: Vec<f64> = Attribute::ALL.iter().map(|&a| self.weights.get(a)).collect();
        if ws.iter().any(|w| !(w.is_finite() && *w >= 0.0)) || ws.iter().sum::<f64>() <= 0.0 {
            return bad("weights must be non-negative with a positive sum");
        }
        Ok(())
    }

    pub fn metric_params(&self) -> MetricParams {
        MetricParams {
            sample_spacing: self.sample_spacing,
            visibility_mode: self.visibility_mode,
            residual_tolerance: self.residual_tolerance,
        }
    }
}

/// Integer complexity class, 1 (simple) to 5 (complex).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct ComplexityClass(u8);

impl ComplexityClass {
    pub fn new(value: u8) -> Result<Self> {
        if (1..=5).contains(&value) {
            Ok(Self(value))
        } else {
            Err(Error::InvalidScore(f64::from(value)))
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }
}

impl TryFrom<u8> for ComplexityClass {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self> {
        ComplexityClass::new(v)
    }
}

impl From<ComplexityClass> for u8 {
    fn from(c: ComplexityClass) -> u8 {
        c.0
    }
}

impl fmt::Display for ComplexityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Raw input to [`normalize`], one variant per measure shape.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RawValue {
    Rotation { accumulated_degrees: f64 },
    Size { mean_width: f64, mean_height: f64 },
    /// Fraction in [0, 1] (visibility, symmetry, clutter coverage, order).
    Fraction(f64),
}

/// Relative distance of `x` outside the band `[lo, hi]`.
pub fn band_deviation(x: f64, [lo, hi]: [f64; 2]) -> f64 {
    if x < lo {
        (lo - x) / lo
    } else if x > hi {
        (x - hi) / hi
    } else {
        0.0
    }
}

/// Scalar that the score is a function of: degrees per 100 m for rotation,
/// relative deviation from the comfort band for size, the fraction otherwise.
pub fn raw_scalar(attribute: Attribute, raw: &RawValue, config: &ScaleConfig, path_length: f64) -> Result<f64> {
    match (attribute, *raw) {
        (Attribute::Rotation, RawValue::Rotation { accumulated_degrees }) => {
            if path_length <= 0.0 {
                return Err(Error::DegenerateGeometry("rotation rate needs a positive path length".into()));
            }
            Ok(accumulated_degrees * 100.0 / path_length)
        }
        (Attribute::Size, RawValue::Size { mean_width, mean_height }) => Ok(band_deviation(
            mean_width,
            config.size_width_band,
        )
        .max(band_deviation(mean_height, config.size_height_band))),
        (Attribute::Visibility | Attribute::Symmetry | Attribute::Clutter | Attribute::Order, RawValue::Fraction(f)) => {
            Ok(f)
        }
        (a, _) => Err(Error::AttributeMismatch(a.name().into())),
    }
}

/// Complexity score in [0, 1] for a raw value.
pub fn normalize(attribute: Attribute, raw: &RawValue, config: &ScaleConfig, path_length: f64) -> Result<f64> {
    let x = raw_scalar(attribute, raw, config, path_length)?;
    let score = match attribute {
        Attribute::Rotation => x / config.rotation_degrees_cap,
        Attribute::Clutter => x / config.clutter_cap,
        Attribute::Size => x / config.size_deviation_cap,
        Attribute::Visibility | Attribute::Symmetry | Attribute::Order => 1.0 - x,
    };
    Ok(score.clamp(0.0, 1.0))
}

/// Parses an attribute name and normalises; unknown names are rejected.
pub fn normalize_named(attribute: &str, raw: &RawValue, config: &ScaleConfig, path_length: f64) -> Result<f64> {
    normalize(attribute.parse()?, raw, config, path_length)
}

/// Scores within this distance below a bin edge are treated as on the edge,
/// so that values like `1 - 0.8` land in the bin the decimal suggests.
const EDGE_SNAP: f64 = 1e-12;

pub fn classify(score: f64, config: &ScaleConfig) -> Result<ComplexityClass> {
    if !(0.0..=1.0).contains(&score) {
        return Err(Error::InvalidScore(score));
    }
    let above = config.bin_edges.iter().filter(|&&e| score >= e - EDGE_SNAP).count();
    ComplexityClass::new(1 + above as u8)
}

fn round_half_up(mean: f64) -> ComplexityClass {
    let v = (mean + 0.5 + 1e-9).floor().clamp(1.0, 5.0) as u8;
    ComplexityClass(v)
}

/// Mean of the classes and its round-half-up class.
pub fn aggregate(classes: &[ComplexityClass]) -> Result<(f64, ComplexityClass)> {
    let weighted: Vec<(ComplexityClass, f64)> = classes.iter().map(|&c| (c, 1.0)).collect();
    aggregate_weighted(&weighted)
}

pub fn aggregate_weighted(classes: &[(ComplexityClass, f64)]) -> Result<(f64, ComplexityClass)> {
    let total: f64 = classes.iter().map(|&(_, w)| w).sum();
    if classes.is_empty() || total <= 0.0 {
        return Err(Error::EmptyReport);
    }
    let mean = classes.iter().map(|&(c, w)| f64::from(c.0) * w).sum::<f64>() / total;
    Ok((mean, round_half_up(mean)))
}

/// Inverted-U preference over the aggregate, peaking at the moderate class 3.
pub fn preference_score(aggregate_mean: f64) -> Result<f64> {
    if !(1.0..=5.0).contains(&aggregate_mean) {
        return Err(Error::InvalidScore(aggregate_mean));
    }
    let d = (aggregate_mean - 3.0).abs() / 2.0;
    Ok(1.0 - d * d)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributeAssessment {
    pub attribute: Attribute,
    /// See [`raw_scalar`].
    pub raw: f64,
    pub score: f64,
    pub class: ComplexityClass,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentAssessment {
    pub index: usize,
    pub start_chainage: f64,
    pub end_chainage: f64,
    pub corridor: Option<String>,
    pub attributes: Vec<AttributeAssessment>,
    pub aggregate_mean: f64,
    pub overall_class: ComplexityClass,
}

impl SegmentAssessment {
    pub fn class_of(&self, a: Attribute) -> ComplexityClass {
        self.attributes.iter().find(|x| x.attribute == a).map(|x| x.class).expect("all attributes assessed")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub attributes: Vec<AttributeAssessment>,
    pub segments: Vec<SegmentAssessment>,
    pub aggregate_mean: f64,
    pub overall_class: ComplexityClass,
    pub preference: f64,
    pub profile: AttributeProfile,
}

impl ComplexityReport {
    pub fn assessment(&self, a: Attribute) -> &AttributeAssessment {
        self.attributes.iter().find(|x| x.attribute == a).expect("all attributes assessed")
    }

    pub fn class_of(&self, a: Attribute) -> ComplexityClass {
        self.assessment(a).class
    }
}

fn assess(attribute: Attribute, raw: RawValue, config: &ScaleConfig, length: f64) -> Result<AttributeAssessment> {
    let score = normalize(attribute, &raw, config, length)?;
    Ok(AttributeAssessment {
        attribute,
        raw: raw_scalar(attribute, &raw, config, length)?,
        score,
        class: classify(score, config)?,
    })
}

fn weighted_mean(items: &[AttributeAssessment], config: &ScaleConfig) -> Result<(f64, ComplexityClass)> {
    let w: Vec<(ComplexityClass, f64)> = items.iter().map(|a| (a.class, config.weights.get(a.attribute))).collect();
    aggregate_weighted(&w)
}

/// Classifies an already computed profile.
pub fn assess_profile(profile: AttributeProfile, scene: &Scene, path: &NavPath, config: &ScaleConfig) -> Result<ComplexityReport> {
    let p = &profile;
    let length = p.path_length;
    let attributes = vec![
        assess(Attribute::Rotation, RawValue::Rotation { accumulated_degrees: p.rotation.accumulated_degrees }, config, length)?,
        assess(Attribute::Size, RawValue::Size { mean_width: p.size.mean_width, mean_height: p.size.mean_height }, config, length)?,
        assess(Attribute::Visibility, RawValue::Fraction(p.visibility.visible_fraction), config, length)?,
        assess(Attribute::Symmetry, RawValue::Fraction(p.symmetry.best_score), config, length)?,
        assess(Attribute::Clutter, RawValue::Fraction(p.clutter.coverage_fraction), config, length)?,
        assess(Attribute::Order, RawValue::Fraction(p.order.ordered_fraction), config, length)?,
    ];
    let (aggregate_mean, overall_class) = weighted_mean(&attributes, config)?;
    let mut segments = Vec::with_capacity(path.segments.len());
    for (k, seg) in path.segments.iter().enumerate() {
        let len = seg.length();
        let (w, h) = p.size.per_segment[k];
        let attrs = vec![
            assess(Attribute::Rotation, RawValue::Rotation { accumulated_degrees: p.rotation.per_segment_degrees[k] }, config, len)?,
            assess(Attribute::Size, RawValue::Size { mean_width: w, mean_height: h }, config, len)?,
            assess(Attribute::Visibility, RawValue::Fraction(p.visibility.per_segment_fractions[k]), config, len)?,
            assess(Attribute::Symmetry, RawValue::Fraction(p.symmetry.per_segment_scores[k]), config, len)?,
            assess(Attribute::Clutter, RawValue::Fraction(p.clutter.per_segment_fractions[k]), config, len)?,
            assess(Attribute::Order, RawValue::Fraction(p.order.per_segment_fractions[k]), config, len)?,
        ];
        let (mean, class) = weighted_mean(&attrs, config)?;
        segments.push(SegmentAssessment {
            index: k,
            start_chainage: seg.start_chainage,
            end_chainage: seg.end_chainage,
            corridor: seg.corridor.map(|c| scene.corridors[c].id.clone()),
            attributes: attrs,
            aggregate_mean: mean,
            overall_class: class,
        });
    }
    Ok(ComplexityReport {
        attributes,
        segments,
        aggregate_mean,
        overall_class,
        preference: preference_score(aggregate_mean)?,
        profile,
    })
}

/// Runs all six metrics and classifies them per attribute and per segment.
pub fn identify(scene: &Scene, path: &NavPath, config: &ScaleConfig) -> Result<ComplexityReport> {
    identify_cached(scene, path, config, None)
}

/// As [`identify`], reusing order fits from `cache`.
pub fn identify_cached(
    scene: &Scene,
    path: &NavPath,
    config: &ScaleConfig,
    cache: Option<&OrderCache>,
) -> Result<ComplexityReport> {
    config.validate()?;
    let resegmented;
    let path = if path.turn_threshold == config.turn_threshold {
        path
    } else {
        resegmented = path.resegment(scene, config.turn_threshold)?;
        &resegmented
    };
    let profile = compute_profile_cached(scene, path, &config.metric_params(), cache)?;
    assess_profile(profile, scene, path, config)
}
