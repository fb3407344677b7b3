//! Single navigation trials: a velocity-commanded point mass bounded by the
//! platform's kinodynamic profile, flying through a scene under a pluggable
//! planner.

mod dynamics;
mod planner;
mod reference;
mod sensing;
mod straight;
mod trial;
mod world;

use serde::{Deserialize, Serialize};

use crate::geometry::Vec3;

pub use dynamics::{max_acceleration, reorientation_rate, step_dynamics, ACCEL_FLOOR};
pub use planner::{Decision, Observation, Planner, TrialContext};
pub use reference::{greedy_reference_planner, ReferenceParams, ReferencePlanner};
pub use sensing::PointIndex;
pub use straight::{straight_flight_planner, StraightFlightPlanner};
pub use trial::{run_trial, run_trial_in, write_log_csv, LogRow, Outcome, SceneEnv, TrialOptions, TrialResult};
pub use world::{check_collision, CollisionWorld};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("task parameter `{name}` = {value} is invalid")]
    InvalidTask { name: &'static str, value: f64 },
}

/// Trial protocol constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub v_max: f64,
    pub t_max: f64,
    pub goal_radius: f64,
    pub settle_speed: f64,
    pub vehicle_radius: f64,
    pub dt: f64,
    pub sensing_radius: f64,
    /// How long the settle condition must persist before success is declared.
    pub settle_hold: f64,
}

impl Default for TaskSpec {
    fn default() -> Self {
        TaskSpec {
            v_max: 4.0,
            t_max: 90.0,
            goal_radius: 2.0,
            settle_speed: 0.2,
            vehicle_radius: 0.3,
            dt: 0.02,
            sensing_radius: 5.0,
            settle_hold: 1.0,
        }
    }
}

impl TaskSpec {
    pub fn validate(&self) -> Result<(), SimError> {
        let fields = [
            ("v_max", self.v_max),
            ("t_max", self.t_max),
            ("goal_radius", self.goal_radius),
            ("settle_speed", self.settle_speed),
            ("vehicle_radius", self.vehicle_radius),
            ("dt", self.dt),
            ("sensing_radius", self.sensing_radius),
        ];
        for (name, value) in fields {
            if !(value > 0.0 && value.is_finite()) {
                return Err(SimError::InvalidTask { name, value });
            }
        }
        if self.dt > 0.05 {
            return Err(SimError::InvalidTask { name: "dt", value: self.dt });
        }
        if !(self.settle_hold >= 0.0 && self.settle_hold.is_finite()) {
            return Err(SimError::InvalidTask { name: "settle_hold", value: self.settle_hold });
        }
        Ok(())
    }

    /// Simulation steps needed to cover `seconds`, rounded to the nearest step.
    pub fn steps_for(&self, seconds: f64) -> u64 {
        (seconds / self.dt).round() as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    pub position: Vec3,
    pub velocity: Vec3,
    pub yaw: f64,
    pub time: f64,
    /// Unit direction of the current thrust-induced acceleration, or zero
    /// when level.
    pub accel_direction: Vec3,
    pub yaw_rate: f64,
}

impl VehicleState {
    pub fn at_rest(position: Vec3, yaw: f64) -> Self {
        VehicleState {
            position,
            velocity: Vec3::zeros(),
            yaw,
            time: 0.0,
            accel_direction: Vec3::zeros(),
            yaw_rate: 0.0,
        }
    }

    pub fn speed(&self) -> f64 {
        self.velocity.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlannerCommand {
    pub desired_velocity: Vec3,
    pub desired_yaw_rate: f64,
}

impl PlannerCommand {
    pub fn velocity(v: Vec3) -> Self {
        PlannerCommand { desired_velocity: v, desired_yaw_rate: 0.0 }
    }

    pub fn hover() -> Self {
        Self::velocity(Vec3::zeros())
    }

    pub fn is_finite(&self) -> bool {
        self.desired_velocity.iter().all(|v| v.is_finite()) && self.desired_yaw_rate.is_finite()
    }
}
