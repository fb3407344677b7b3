use super::{max_acceleration, Decision, Observation, Planner, PlannerCommand, TrialContext};

/// Share of the acceleration budget the approach profile relies on.
const BRAKING_SHARE: f64 = 0.8;

/// Flies the direct start-to-goal line with no obstacle avoidance.
#[derive(Debug, Clone, Default)]
pub struct StraightFlightPlanner {
    v_max: f64,
    slow_radius: f64,
    braking: f64,
}

pub fn straight_flight_planner() -> StraightFlightPlanner {
    StraightFlightPlanner::default()
}

/// Approach speed at distance `d` from the goal: cruise, proportional inside
/// `slow_radius`, and never more than what `braking` can stop within `d`.
pub(crate) fn approach_speed(d: f64, v_max: f64, slow_radius: f64, braking: f64) -> f64 {
    v_max.min(v_max * d / slow_radius).min((2.0 * braking * d).sqrt())
}

impl Planner for StraightFlightPlanner {
    fn name(&self) -> &str {
        "straight"
    }

    fn reset(&mut self, context: &TrialContext, _seed: u64) {
        self.v_max = context.task.v_max;
        self.slow_radius = 2.0 * context.task.goal_radius;
        self.braking = BRAKING_SHARE * max_acceleration(&context.profile);
    }

    fn observe(&mut self, obs: &Observation<'_>) -> Decision {
        let offset = obs.goal - obs.state.position;
        let d = offset.norm();
        if d < 1e-12 {
            return Decision::Command(PlannerCommand::hover());
        }
        let speed = approach_speed(d, self.v_max, self.slow_radius, self.braking);
        Decision::Command(PlannerCommand::velocity(offset / d * speed))
    }
}
