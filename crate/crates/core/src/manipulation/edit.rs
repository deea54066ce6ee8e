//! Atomic morphology edits and the change log built from them.
//!
//! Every edit stores absolute values (target coordinates, new footprints) so
//! replaying a log is exact and does not depend on floating-point history.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Obstacle, Point2, Polygon, Polyline, Scene, Wall};

/// Operator family that produced a step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operator {
    RotationSimplify,
    SizeFit,
    VisibilitySearch,
    Symmetrize,
    ClutterAdjust,
    OrderImpose,
    /// Width clamping applied before the search starts.
    Repair,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "edit", rename_all = "snake_case")]
pub enum Edit {
    MoveVertex { index: usize, to: Point2 },
    /// The new vertex takes `index`; later vertices shift up by one.
    InsertVertex { index: usize, at: Point2 },
    SetCorridorAxis { corridor: String, axis: [Point2; 2] },
    ResizeCorridor { corridor: String, width: f64, height: f64 },
    SetWall { wall: String, footprint: Polygon },
    RemoveWall { wall: String },
    InsertWall { wall: Wall },
    RemoveObstacle { obstacle: String },
    MoveObstacle { obstacle: String, footprint: Polygon },
    InsertObstacle { obstacle: Obstacle },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChangeStep {
    pub operator: Operator,
    #[serde(flatten)]
    pub edit: Edit,
}

/// Scene plus the navigation polyline being manipulated.
#[derive(Clone, Debug, PartialEq)]
pub struct Morphology {
    pub scene: Scene,
    pub line: Polyline,
}

fn unknown(kind: &str, id: &str) -> Error {
    Error::InvalidGeometry(format!("edit refers to unknown {kind} `{id}`"))
}

impl Morphology {
    pub fn new(scene: Scene, line: Polyline) -> Self {
        Self { scene, line }
    }

    pub fn apply(&mut self, edit: &Edit) -> Result<()> {
        let scene = &mut self.scene;
        match edit {
            Edit::MoveVertex { index, to } => {
                if *index >= self.line.len() {
                    return Err(Error::InvalidGeometry(format!("vertex {index} out of range")));
                }
                self.line = self.line.with_vertex(*index, *to)?;
            }
            Edit::InsertVertex { index, at } => {
                if *index == 0 || *index >= self.line.len() {
                    return Err(Error::InvalidGeometry(format!("cannot insert a vertex at {index}")));
                }
                let mut v = self.line.vertices().to_vec();
                v.insert(*index, *at);
                self.line = Polyline::new(v)?;
            }
            Edit::SetCorridorAxis { corridor, axis } => {
                let i = scene.corridor_index(corridor).ok_or_else(|| unknown("corridor", corridor))?;
                let mut c = scene.corridors[i].clone();
                c.axis = *axis;
                c.validate()?;
                scene.corridors[i] = c;
            }
            Edit::ResizeCorridor { corridor, width, height } => {
                let i = scene.corridor_index(corridor).ok_or_else(|| unknown("corridor", corridor))?;
                let mut c = scene.corridors[i].clone();
                c.width = *width;
                c.height = *height;
                c.validate()?;
                scene.corridors[i] = c;
            }
            Edit::SetWall { wall, footprint } => {
                let i = scene.wall_index(wall).ok_or_else(|| unknown("wall", wall))?;
                scene.walls[i].footprint = footprint.clone();
            }
            Edit::RemoveWall { wall } => {
                let i = scene.wall_index(wall).ok_or_else(|| unknown("wall", wall))?;
                scene.walls.remove(i);
            }
            Edit::InsertWall { wall } => {
                if scene.wall_index(&wall.id).is_some() {
                    return Err(Error::InvalidGeometry(format!("duplicate wall id `{}`", wall.id)));
                }
                scene.walls.push(wall.clone());
            }
            Edit::RemoveObstacle { obstacle } => {
                let i = scene.obstacle_index(obstacle).ok_or_else(|| unknown("obstacle", obstacle))?;
                scene.obstacles.remove(i);
            }
            Edit::MoveObstacle { obstacle, footprint } => {
                let i = scene.obstacle_index(obstacle).ok_or_else(|| unknown("obstacle", obstacle))?;
                scene.obstacles[i].footprint = footprint.clone();
            }
            Edit::InsertObstacle { obstacle } => {
                if scene.obstacle_index(&obstacle.id).is_some() {
                    return Err(Error::InvalidGeometry(format!("duplicate obstacle id `{}`", obstacle.id)));
                }
                scene.obstacles.push(obstacle.clone());
            }
        }
        Ok(())
    }
}

/// Applies `log` in order to a copy of the input morphology.
pub fn replay(scene: &Scene, line: &Polyline, log: &[ChangeStep]) -> Result<(Scene, Polyline)> {
    let mut m = Morphology::new(scene.clone(), line.clone());
    for step in log {
        m.apply(&step.edit)?;
    }
    Ok((m.scene, m.line))
}
