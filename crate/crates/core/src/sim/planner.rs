use super::trial::SceneEnv;
use super::{PlannerCommand, TaskSpec, VehicleState};
use crate::geometry::Vec3;
use crate::kinodyn::KinodynamicProfile;

/// Static facts a planner may use for a whole trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialContext {
    pub bounds: [f64; 2],
    pub ceiling: f64,
    pub start: Vec3,
    pub goal: Vec3,
    pub task: TaskSpec,
    pub profile: KinodynamicProfile,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Decision {
    Command(PlannerCommand),
    /// The planner considers the task finished.
    Done,
    /// No route to the goal exists in the planner's knowledge.
    NoPath(String),
}

/// What the vehicle knows at one step: its own state, the goal and the
/// obstacle surface points within sensing range.
pub struct Observation<'a> {
    pub state: VehicleState,
    pub goal: Vec3,
    pub step: u64,
    pub(crate) env: &'a SceneEnv,
    pub(crate) sensing_radius: f64,
}

impl Observation<'_> {
    /// Stable ids of visible surface points; ids identify the same point
    /// across steps of one trial.
    pub fn local_point_ids(&self) -> Vec<u32> {
        self.env.sensor().within(&self.state.position, self.sensing_radius)
    }

    pub fn point(&self, id: u32) -> Vec3 {
        self.env.sensor().point(id)
    }

    pub fn local_points(&self) -> Vec<Vec3> {
        self.local_point_ids().into_iter().map(|id| self.point(id)).collect()
    }
}

/// A navigation policy. Implementations must be deterministic given the seed
/// passed to `reset` and the observation sequence.
pub trait Planner {
    fn name(&self) -> &str;

    fn reset(&mut self, context: &TrialContext, seed: u64);

    fn observe(&mut self, observation: &Observation<'_>) -> Decision;
}
