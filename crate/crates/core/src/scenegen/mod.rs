//! Procedural scenario families.
//!
//! Every scene is a pure function of `(family, seed, index)`. Scenes are laid
//! out with `x` across the short (width) axis and `y` along the flight axis;
//! start and goal share `x` and `z`, so the straight reference path is parallel
//! to `y`.

mod export;
mod families;
mod grid;
mod maze;
mod perlin;

pub use export::{export_scene, format_g6, sample_surface, write_scene, ExportFormat};
pub use families::{
    gen_cylinder_field, gen_forest, gen_maze, gen_narrow_gap, gen_perlin, gen_sudden_drop, gen_urban, voxel_fill_fraction,
    CYLINDER_DENSITY, FOREST_DENSITY,
};
pub use grid::{validate_scene, validate_scene_at, OccupancyGrid, Solvability};
pub use maze::PerfectMaze;
pub use perlin::{fill_threshold, PerlinNoise};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Obstacle, Vec3};

#[derive(Debug, Error)]
pub enum ScenegenError {
    #[error("scenario index {0} outside 1..=10")]
    InvalidIndex(u32),
    #[error("unknown scenario family `{0}`")]
    UnknownFamily(String),
    #[error("{family}: could not place obstacle after {attempts} attempts")]
    Placement { family: Family, attempts: usize },
    #[error("fill threshold search failed: {0}")]
    Threshold(String),
    #[error("invalid export density {0}")]
    InvalidDensity(f64),
    #[error("manifest: {0}")]
    Manifest(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Classic families mirror common test environments; theoretical ones are
/// stress constructs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioClass {
    Classic,
    Theoretical,
}

impl ScenarioClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioClass::Classic => "classic",
            ScenarioClass::Theoretical => "theoretical",
        }
    }
}

impl std::str::FromStr for ScenarioClass {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "classic" => Ok(ScenarioClass::Classic),
            "theoretical" => Ok(ScenarioClass::Theoretical),
            other => Err(format!("unknown scenario class `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Forest,
    Urban,
    CylinderField,
    NarrowGap,
    SuddenDrop,
    Maze,
    PerlinNoise,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::Forest,
        Family::Urban,
        Family::CylinderField,
        Family::NarrowGap,
        Family::SuddenDrop,
        Family::Maze,
        Family::PerlinNoise,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Forest => "forest",
            Family::Urban => "urban",
            Family::CylinderField => "cylinder-field",
            Family::NarrowGap => "narrow-gap",
            Family::SuddenDrop => "sudden-drop",
            Family::Maze => "maze",
            Family::PerlinNoise => "perlin-noise",
        }
    }

    pub fn class(&self) -> ScenarioClass {
        match self {
            Family::Forest | Family::Urban | Family::CylinderField => ScenarioClass::Classic,
            _ => ScenarioClass::Theoretical,
        }
    }

    /// `(width, length)` in metres.
    pub fn bounds(&self) -> [f64; 2] {
        match self {
            Family::Forest | Family::CylinderField => [40.0, 60.0],
            Family::Urban => [60.0, 60.0],
            Family::NarrowGap | Family::SuddenDrop => [50.0, 50.0],
            Family::Maze => [25.0, 40.0],
            Family::PerlinNoise => [40.0, 50.0],
        }
    }

    pub fn ceiling(&self) -> f64 {
        match self {
            Family::Forest | Family::CylinderField => 3.0,
            Family::Urban => 10.0,
            Family::NarrowGap | Family::SuddenDrop | Family::PerlinNoise => 4.0,
            Family::Maze => 2.0,
        }
    }

    /// Altitude of start and goal.
    pub fn flight_altitude(&self) -> f64 {
        match self {
            Family::Forest | Family::CylinderField => 1.5,
            Family::Urban | Family::NarrowGap | Family::PerlinNoise => 2.0,
            Family::SuddenDrop => 2.5,
            Family::Maze => 1.0,
        }
    }

    /// Grid resolution used by [`validate_scene`]. Fine enough that the
    /// narrowest intended passage keeps at least one free cell centre.
    pub fn validation_resolution(&self) -> f64 {
        match self {
            Family::NarrowGap => 0.1,
            Family::Forest | Family::CylinderField => 0.2,
            Family::SuddenDrop | Family::Maze | Family::PerlinNoise => 0.25,
            Family::Urban => 0.5,
        }
    }

    pub fn generate(&self, seed: u64, index: u32) -> Result<Scene, ScenegenError> {
        match self {
            Family::Forest => gen_forest(seed, index),
            Family::Urban => gen_urban(seed, index),
            Family::CylinderField => gen_cylinder_field(seed, index),
            Family::NarrowGap => gen_narrow_gap(seed, index),
            Family::SuddenDrop => gen_sudden_drop(seed, index),
            Family::Maze => gen_maze(seed, index),
            Family::PerlinNoise => gen_perlin(seed, index),
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Family {
    type Err = ScenegenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s.to_ascii_lowercase().chars().filter(|c| c.is_ascii_alphanumeric()).collect();
        Ok(match key.as_str() {
            "forest" => Family::Forest,
            "urban" => Family::Urban,
            "cylinder" | "cylinders" | "cylinderfield" | "randomanglecylinder" => Family::CylinderField,
            "narrowgap" | "gap" => Family::NarrowGap,
            "suddendrop" | "drop" => Family::SuddenDrop,
            "maze" => Family::Maze,
            "perlin" | "perlinnoise" | "randomperlinnoise" => Family::PerlinNoise,
            _ => return Err(ScenegenError::UnknownFamily(s.to_string())),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub yaw: f64,
}

impl Pose {
    pub fn position(&self) -> Vec3 {
        Vec3::new(self.x, self.y, self.z)
    }
}

/// A generated (or hand-built) navigation scene.
///
/// Field order is the manifest key order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub family: Family,
    pub seed: u64,
    pub index: u32,
    /// `[width, length]`, metres.
    pub bounds: [f64; 2],
    pub ceiling: f64,
    pub start: Pose,
    pub goal: Vec3,
    pub obstacles: Vec<Obstacle>,
}

/// Inset of start and goal from each end of the flight axis, metres.
pub const START_GOAL_INSET: f64 = 2.0;
/// Minimum obstacle distance kept around start and goal by the generators.
pub const START_GOAL_CLEARANCE: f64 = 1.0;

impl Scene {
    /// Obstacle-free scene with the family's dimensions and default start/goal.
    pub fn empty(family: Family, seed: u64, index: u32) -> Scene {
        let [w, l] = family.bounds();
        let z = family.flight_altitude();
        Scene {
            family,
            seed,
            index,
            bounds: [w, l],
            ceiling: family.ceiling(),
            start: Pose { x: w / 2.0, y: START_GOAL_INSET, z, yaw: std::f64::consts::FRAC_PI_2 },
            goal: Vec3::new(w / 2.0, l - START_GOAL_INSET, z),
            obstacles: Vec::new(),
        }
    }

    pub fn width(&self) -> f64 {
        self.bounds[0]
    }

    pub fn length(&self) -> f64 {
        self.bounds[1]
    }

    pub fn start_position(&self) -> Vec3 {
        self.start.position()
    }

    /// Signed distance from `p` to the nearest obstacle (infinite if none).
    pub fn obstacle_distance(&self, p: &Vec3) -> f64 {
        self.obstacles.iter().map(|o| o.signed_distance(p)).fold(f64::INFINITY, f64::min)
    }

    /// Whether `p` keeps `clearance` from every obstacle.
    pub fn clear_of(&self, p: &Vec3, clearance: f64) -> bool {
        self.obstacles.iter().all(|o| o.signed_distance(p) >= clearance)
    }

    pub fn to_manifest_json(&self) -> Result<String, ScenegenError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_manifest_json(text: &str) -> Result<Scene, ScenegenError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Stem used for exported files, e.g. `maze_s7_i3`.
    pub fn file_stem(&self) -> String {
        format!("{}_s{}_i{}", self.family.as_str(), self.seed, self.index)
    }
}

pub(crate) fn check_index(index: u32) -> Result<(), ScenegenError> {
    if (1..=10).contains(&index) {
        Ok(())
    } else {
        Err(ScenegenError::InvalidIndex(index))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_names_round_trip() {
        for f in Family::ALL {
            assert_eq!(f.as_str().parse::<Family>().unwrap(), f);
        }
        assert!("nosuch".parse::<Family>().is_err());
        assert_eq!("Random-Angle Cylinder".parse::<Family>().unwrap(), Family::CylinderField);
    }

    #[test]
    fn class_split() {
        let classic = Family::ALL.iter().filter(|f| f.class() == ScenarioClass::Classic).count();
        assert_eq!(classic, 3);
    }

    #[test]
    fn empty_scene_reference_path_parallel_to_long_axis() {
        for f in Family::ALL {
            let s = Scene::empty(f, 0, 1);
            assert_eq!(s.start.x, s.goal.x);
            assert_eq!(s.start.z, s.goal.z);
            assert!(s.goal.y > s.start.y);
        }
    }
}
