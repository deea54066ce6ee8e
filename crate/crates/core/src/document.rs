//! On-disk scene and report documents (format version 1).

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::geometry::{CorridorSegment, NavPath, Obstacle, Point2, Polygon, Polyline, Rect, Scene, Wall};
use crate::scale::{ComplexityReport, ScaleConfig};

pub const FORMAT_VERSION: &str = "1";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DocumentError {
    /// The bytes are not a well-formed document. `pointer` locates the
    /// offending value (RFC 6901, empty for the root).
    #[error("parse error at `{pointer}`: {message}")]
    Parse { pointer: String, message: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("path not found: `{0}`")]
    PathNotFound(String),
}

impl DocumentError {
    pub fn pointer(&self) -> Option<&str> {
        match self {
            DocumentError::Parse { pointer, .. } => Some(pointer),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
enum Version {
    #[serde(rename = "1")]
    V1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Units {
    Meters,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWall {
    id: String,
    footprint: Vec<Point2>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawObstacle {
    id: String,
    footprint: Vec<Point2>,
    height: f64,
    #[serde(default)]
    tag: String,
    #[serde(default = "yes")]
    movable: bool,
}

fn yes() -> bool {
    true
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCorridor {
    id: String,
    axis: [Point2; 2],
    width: f64,
    height: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPath {
    name: String,
    vertices: Vec<Point2>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    corridors: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    format_version: Version,
    units: Units,
    bounds: [Point2; 2],
    #[serde(default)]
    walls: Vec<RawWall>,
    #[serde(default)]
    obstacles: Vec<RawObstacle>,
    #[serde(default)]
    corridors: Vec<RawCorridor>,
    paths: Vec<RawPath>,
}

/// A named navigation polyline. `corridors` optionally restricts which
/// corridors the path may attach to.
#[derive(Clone, Debug, PartialEq)]
pub struct NamedPath {
    pub name: String,
    pub line: Polyline,
    pub corridors: Option<Vec<String>>,
}

/// A validated scene with its named paths.
#[derive(Clone, Debug, PartialEq)]
pub struct SceneDocument {
    pub scene: Scene,
    pub paths: Vec<NamedPath>,
}

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => out.push_str(&format!("/{}", key.replace('~', "~0").replace('/', "~1"))),
            Segment::Enum { variant } => out.push_str(&format!("/{variant}")),
            Segment::Unknown => {}
        }
    }
    out
}

/// serde reports a missing field at its parent; point at the field itself.
fn missing_field(message: &str) -> Option<&str> {
    let rest = message.strip_prefix("missing field `")?;
    rest.split('`').next()
}

fn invalid(what: String, e: crate::Error) -> DocumentError {
    DocumentError::Validation(format!("{what}: {e}"))
}

impl SceneDocument {
    pub fn new(scene: Scene, paths: Vec<NamedPath>) -> Self {
        Self { scene, paths }
    }

    /// Parses and validates a document.
    pub fn from_slice(bytes: &[u8]) -> Result<Self, DocumentError> {
        let de = &mut serde_json::Deserializer::from_slice(bytes);
        let raw: RawDocument = serde_path_to_error::deserialize(de).map_err(|e| {
            let mut pointer = pointer_of(e.path());
            let message = e.inner().to_string();
            if let Some(field) = missing_field(&message) {
                pointer.push('/');
                pointer.push_str(field);
            }
            DocumentError::Parse { pointer, message }
        })?;
        Self::from_raw(raw)
    }

    fn from_raw(raw: RawDocument) -> Result<Self, DocumentError> {
        let bounds = Rect::new(raw.bounds[0], raw.bounds[1]).map_err(|e| invalid("bounds".into(), e))?;
        let mut scene = Scene::new(bounds);
        for w in raw.walls {
            let what = format!("wall `{}`", w.id);
            let footprint = Polygon::new(w.footprint).map_err(|e| invalid(what, e))?;
            scene.walls.push(Wall::new(w.id, footprint));
        }
        for o in raw.obstacles {
            let what = format!("obstacle `{}`", o.id);
            let footprint = Polygon::new(o.footprint).map_err(|e| invalid(what.clone(), e))?;
            let mut ob = Obstacle::new(o.id, footprint, o.height).map_err(|e| invalid(what, e))?;
            ob.tag = o.tag;
            ob.movable = o.movable;
            scene.obstacles.push(ob);
        }
        for c in raw.corridors {
            let what = format!("corridor `{}`", c.id);
            let corridor = CorridorSegment::new(c.id, c.axis[0], c.axis[1], c.width, c.height)
                .map_err(|e| invalid(what, e))?;
            scene.corridors.push(corridor);
        }
        scene.validate().map_err(|e| DocumentError::Validation(e.to_string()))?;
        let mut corridor_ids: Vec<&str> = scene.corridors.iter().map(|c| c.id.as_str()).collect();
        corridor_ids.sort_unstable();
        if let Some(w) = corridor_ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(DocumentError::Validation(format!("duplicate corridor id `{}`", w[0])));
        }
        if raw.paths.is_empty() {
            return Err(DocumentError::Validation("document has no paths".into()));
        }
        let mut paths: Vec<NamedPath> = Vec::new();
        for p in raw.paths {
            let what = format!("path `{}`", p.name);
            if paths.iter().any(|q| q.name == p.name) {
                return Err(DocumentError::Validation(format!("duplicate {what}")));
            }
            let line = Polyline::new(p.vertices).map_err(|e| invalid(what.clone(), e))?;
            if let Some(v) = line.vertices().iter().find(|&&v| !scene.bounds.contains(v)) {
                return Err(DocumentError::Validation(format!(
                    "{what} has a vertex outside the bounds at ({}, {})",
                    v.x, v.y
                )));
            }
            if let Some(ids) = &p.corridors {
                if let Some(id) = ids.iter().find(|id| scene.corridor_index(id).is_none()) {
                    return Err(DocumentError::Validation(format!("{what} references unknown corridor `{id}`")));
                }
            }
            paths.push(NamedPath { name: p.name, line, corridors: p.corridors });
        }
        Ok(Self { scene, paths })
    }

    fn to_raw(&self) -> RawDocument {
        let s = &self.scene;
        RawDocument {
            format_version: Version::V1,
            units: Units::Meters,
            bounds: [s.bounds.min, s.bounds.max],
            walls: s
                .walls
                .iter()
                .map(|w| RawWall { id: w.id.clone(), footprint: w.footprint.ring().to_vec() })
                .collect(),
            obstacles: s
                .obstacles
                .iter()
                .map(|o| RawObstacle {
                    id: o.id.clone(),
                    footprint: o.footprint.ring().to_vec(),
                    height: o.height,
                    tag: o.tag.clone(),
                    movable: o.movable,
                })
                .collect(),
            corridors: s
                .corridors
                .iter()
                .map(|c| RawCorridor { id: c.id.clone(), axis: c.axis, width: c.width, height: c.height })
                .collect(),
            paths: self
                .paths
                .iter()
                .map(|p| RawPath { name: p.name.clone(), vertices: p.line.vertices().to_vec(), corridors: p.corridors.clone() })
                .collect(),
        }
    }

    /// Canonical pretty-printed JSON with a trailing newline.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(&self.to_raw()).expect("document serializes");
        out.push(b'\n');
        out
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self.to_raw()).expect("document serializes")
    }

    pub fn path(&self, name: &str) -> Result<&NamedPath, DocumentError> {
        self.paths.iter().find(|p| p.name == name).ok_or_else(|| DocumentError::PathNotFound(name.into()))
    }

    /// Segments the named path against the scene.
    pub fn nav_path(&self, name: &str, turn_threshold: f64) -> Result<NavPath, DocumentError> {
        let p = self.path(name)?;
        let candidates: Option<Vec<usize>> = p
            .corridors
            .as_ref()
            .map(|ids| ids.iter().filter_map(|id| self.scene.corridor_index(id)).collect());
        NavPath::new(p.line.clone(), &self.scene, turn_threshold, candidates.as_deref())
            .map_err(|e| invalid(format!("path `{name}`"), e))
    }

    /// Copy with the scene replaced and path `name` moved to `line`.
    pub fn with_morphology(&self, name: &str, scene: Scene, line: Polyline) -> Result<Self, DocumentError> {
        let mut doc = self.clone();
        doc.scene = scene;
        let i = doc.paths.iter().position(|p| p.name == name).ok_or_else(|| DocumentError::PathNotFound(name.into()))?;
        doc.paths[i].line = line;
        Ok(doc)
    }

    /// SHA-256 of the canonical serialization, lowercase hex.
    pub fn hash(&self) -> String {
        sha256_hex(&self.to_bytes())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub fn config_hash(config: &ScaleConfig) -> String {
    sha256_hex(&serde_json::to_vec(config).expect("config serializes"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub scene_hash: String,
    pub config_hash: String,
    pub tool_version: String,
    /// RFC 3339, taken from `SOURCE_DATE_EPOCH` when set so reruns stay
    /// byte-identical; otherwise absent.
    pub timestamp: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportDocument {
    pub format_version: String,
    pub path: String,
    pub report: ComplexityReport,
    pub provenance: Provenance,
}

impl ReportDocument {
    pub fn new(doc: &SceneDocument, path: &str, config: &ScaleConfig, report: ComplexityReport, timestamp: Option<String>) -> Self {
        Self {
            format_version: FORMAT_VERSION.into(),
            path: path.into(),
            report,
            provenance: Provenance {
                scene_hash: doc.hash(),
                config_hash: config_hash(config),
                tool_version: env!("CARGO_PKG_VERSION").into(),
                timestamp,
            },
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("report serializes");
        out.push(b'\n');
        out
    }
}

/// `SOURCE_DATE_EPOCH` rendered as RFC 3339, if set and valid.
pub fn source_date_timestamp() -> Option<String> {
    let secs: u64 = std::env::var("SOURCE_DATE_EPOCH").ok()?.trim().parse().ok()?;
    let t = std::time::UNIX_EPOCH + std::time::Duration::from_secs(secs);
    Some(humantime::format_rfc3339_seconds(t).to_string())
}
