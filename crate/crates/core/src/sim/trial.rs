use std::any::Any;
use std::io::{self, Write};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::planner::{Decision, Observation, Planner, TrialContext};
use super::sensing::PointIndex;
use super::world::CollisionWorld;
use super::{step_dynamics, PlannerCommand, SimError, TaskSpec, VehicleState};
use crate::geometry::Vec3;
use crate::kinodyn::KinodynamicProfile;
use crate::scenegen::{sample_surface, Scene};

/// Surface samples per square metre seen by the idealised depth sensor.
pub const SENSOR_DENSITY: f64 = 16.0;

/// Clearance values are saturated here; only near-contact values matter.
pub const CLEARANCE_CUTOFF: f64 = 2.0;

/// Smallest advance of the swept contact search, m.
const SWEEP_STEP: f64 = 1e-4;

/// A scene with its collision structure and, on first use, its sensor index.
/// Shareable across concurrent trials.
#[derive(Debug)]
pub struct SceneEnv {
    scene: Scene,
    world: CollisionWorld,
    sensor: OnceLock<PointIndex>,
}

impl SceneEnv {
    pub fn new(scene: Scene) -> Self {
        let world = CollisionWorld::new(&scene);
        SceneEnv { scene, world, sensor: OnceLock::new() }
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    pub fn world(&self) -> &CollisionWorld {
        &self.world
    }

    pub fn sensor(&self) -> &PointIndex {
        self.sensor.get_or_init(|| {
            let points = sample_surface(&self.scene, SENSOR_DENSITY).expect("sensor density is positive");
            PointIndex::new(points, 2.5)
        })
    }

    /// First point on the segment `from → to` where a sphere of `radius`
    /// touches anything, by conservative advancement along the 1-Lipschitz
    /// clearance field.
    pub fn first_contact(&self, from: &Vec3, to: &Vec3, radius: f64) -> Option<Vec3> {
        let delta = to - from;
        let len = delta.norm();
        let mut s: f64 = 0.0;
        loop {
            let p = if len > 0.0 { from + delta * (s / len) } else { *to };
            let c = self.world.clearance(&p, radius, CLEARANCE_CUTOFF);
            if c <= 0.0 {
                return Some(p);
            }
            if s >= len {
                return None;
            }
            s = (s + c.max(SWEEP_STEP)).min(len);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    Collision,
    Timeout,
    GoalMiss,
    PlanFailure,
}

impl Outcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            Outcome::Success => "success",
            Outcome::Collision => "collision",
            Outcome::Timeout => "timeout",
            Outcome::GoalMiss => "goal_miss",
            Outcome::PlanFailure => "plan_failure",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOptions {
    /// Keep every n-th state in `TrialResult::path`.
    pub path_every: u64,
    pub record_log: bool,
}

impl Default for TrialOptions {
    fn default() -> Self {
        TrialOptions { path_every: 5, record_log: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogRow {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub vx: f64,
    pub vy: f64,
    pub vz: f64,
    pub yaw: f64,
    pub min_clearance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub outcome: Outcome,
    pub elapsed: f64,
    pub path: Vec<Vec3>,
    /// Smallest clearance seen, saturated at `CLEARANCE_CUTOFF`.
    pub min_clearance: f64,
    pub final_state: VehicleState,
    pub diagnostic: Option<String>,
    #[serde(skip)]
    pub log: Vec<LogRow>,
}

pub fn write_log_csv<W: Write>(rows: &[LogRow], out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(io::Error::other)?;
    }
    w.flush()
}

fn panic_message(payload: Box<dyn Any + Send>) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        format!("planner panicked: {s}")
    } else if let Some(s) = payload.downcast_ref::<String>() {
        format!("planner panicked: {s}")
    } else {
        "planner panicked".to_string()
    }
}

/// Run one trial on a freshly prepared scene.
pub fn run_trial(
    planner: &mut dyn Planner,
    scene: &Scene,
    profile: &KinodynamicProfile,
    task: &TaskSpec,
    trial_seed: u64,
) -> Result<TrialResult, SimError> {
    run_trial_in(planner, &SceneEnv::new(scene.clone()), profile, task, trial_seed, &TrialOptions::default())
}

struct Recorder {
    state: VehicleState,
    min_clearance: f64,
    path: Vec<Vec3>,
    log: Vec<LogRow>,
    options: TrialOptions,
}

impl Recorder {
    fn record(&mut self, step: u64, clearance: f64) {
        self.min_clearance = self.min_clearance.min(clearance);
        if step.is_multiple_of(self.options.path_every.max(1)) {
            self.path.push(self.state.position);
        }
        if self.options.record_log {
            let s = &self.state;
            self.log.push(LogRow {
                t: s.time,
                x: s.position.x,
                y: s.position.y,
                z: s.position.z,
                vx: s.velocity.x,
                vy: s.velocity.y,
                vz: s.velocity.z,
                yaw: s.yaw,
                min_clearance: self.min_clearance,
            });
        }
    }

    fn finish(mut self, outcome: Outcome, diagnostic: Option<String>) -> TrialResult {
        if self.path.last() != Some(&self.state.position) {
            self.path.push(self.state.position);
        }
        TrialResult {
            outcome,
            elapsed: self.state.time,
            path: self.path,
            min_clearance: self.min_clearance,
            final_state: self.state,
            diagnostic,
            log: self.log,
        }
    }
}

/// Run one trial against a prepared environment.
///
/// Each step the planner observes, the vehicle advances, and the swept
/// segment is checked for contact. Checks run in the order collision,
/// timeout (`t > t_max`), settled success.
pub fn run_trial_in(
    planner: &mut dyn Planner,
    env: &SceneEnv,
    profile: &KinodynamicProfile,
    task: &TaskSpec,
    trial_seed: u64,
    options: &TrialOptions,
) -> Result<TrialResult, SimError> {
    task.validate()?;
    let scene = env.scene();
    let context = TrialContext {
        bounds: scene.bounds,
        ceiling: scene.ceiling,
        start: scene.start_position(),
        goal: scene.goal,
        task: *task,
        profile: *profile,
    };
    let r = task.vehicle_radius;
    let state = VehicleState::at_rest(scene.start_position(), scene.start.yaw);
    let initial = env.world().clearance(&state.position, r, CLEARANCE_CUTOFF);
    let mut rec = Recorder { state, min_clearance: f64::INFINITY, path: Vec::new(), log: Vec::new(), options: *options };
    rec.record(0, initial);
    if initial <= 0.0 {
        return Ok(rec.finish(Outcome::Collision, Some("start position in contact".into())));
    }
    if let Err(p) = catch_unwind(AssertUnwindSafe(|| planner.reset(&context, trial_seed))) {
        return Ok(rec.finish(Outcome::PlanFailure, Some(panic_message(p))));
    }

    let hold_steps = task.steps_for(task.settle_hold);
    let mut settled_steps = 0u64;
    let mut finished = false;
    for step in 1u64.. {
        let command = if finished {
            PlannerCommand::hover()
        } else {
            let obs = Observation {
                state: rec.state,
                goal: scene.goal,
                step: step - 1,
                env,
                sensing_radius: task.sensing_radius,
            };
            match catch_unwind(AssertUnwindSafe(|| planner.observe(&obs))) {
                Ok(Decision::Command(c)) if c.is_finite() => c,
                Ok(Decision::Command(_)) => {
                    return Ok(rec.finish(Outcome::PlanFailure, Some("non-finite command".into())));
                }
                Ok(Decision::Done) => {
                    if (rec.state.position - scene.goal).norm() > task.goal_radius {
                        return Ok(rec.finish(Outcome::GoalMiss, Some("planner finished outside goal radius".into())));
                    }
                    finished = true;
                    PlannerCommand::hover()
                }
                Ok(Decision::NoPath(msg)) => return Ok(rec.finish(Outcome::PlanFailure, Some(msg))),
                Err(p) => return Ok(rec.finish(Outcome::PlanFailure, Some(panic_message(p)))),
            }
        };

        let previous = rec.state.position;
        let mut next = step_dynamics(&rec.state, &command, profile, task);
        next.time = step as f64 * task.dt;
        if let Some(contact) = env.first_contact(&previous, &next.position, r) {
            next.position = contact;
            rec.state = next;
            let c = env.world().clearance(&contact, r, CLEARANCE_CUTOFF);
            rec.record(step, c);
            return Ok(rec.finish(Outcome::Collision, None));
        }
        rec.state = next;
        let c = env.world().clearance(&next.position, r, CLEARANCE_CUTOFF);
        rec.record(step, c);

        if next.time > task.t_max + 1e-9 {
            return Ok(rec.finish(Outcome::Timeout, None));
        }
        let inside = (next.position - scene.goal).norm() <= task.goal_radius;
        if inside && next.speed() <= task.settle_speed {
            settled_steps += 1;
            if settled_steps > hold_steps {
                return Ok(rec.finish(Outcome::Success, None));
            }
        } else {
            settled_steps = 0;
        }
    }
    unreachable!("trial loop exits through a classification")
}
