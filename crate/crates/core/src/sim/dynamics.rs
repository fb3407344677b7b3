use std::f64::consts::PI;

use super::{PlannerCommand, TaskSpec, VehicleState};
use crate::geometry::Vec3;
use crate::kinodyn::{KinodynamicProfile, STANDARD_GRAVITY};

/// Lower bound on the translational acceleration budget, m/s².
pub const ACCEL_FLOOR: f64 = 0.5;

/// Below this magnitude the requested acceleration counts as zero and the
/// vehicle returns to level.
const LEVEL_EPS: f64 = 1e-9;

/// `max(ACCEL_FLOOR, (twr_max − 1)·g)`.
pub fn max_acceleration(profile: &KinodynamicProfile) -> f64 {
    ((profile.twr_max - 1.0) * STANDARD_GRAVITY).max(ACCEL_FLOOR)
}

/// Angular rate (rad/s) at which the acceleration direction may swing.
///
/// A bang-bang quarter turn at `alpha_xy_max` takes `2·sqrt((π/2)/α)`; the
/// rate is the quarter turn over that time, `sqrt(π·α/8)`.
pub fn reorientation_rate(profile: &KinodynamicProfile) -> f64 {
    (PI * profile.alpha_xy_max / 8.0).sqrt()
}

/// Rotate unit vector `from` toward unit vector `to` by `angle` radians.
fn rotate_toward(from: &Vec3, to: &Vec3, angle: f64) -> Vec3 {
    let mut axis = from.cross(to);
    if axis.norm() < 1e-12 {
        let helper = if from.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
        axis = from.cross(&helper);
    }
    let axis = axis.normalize();
    let perp = axis.cross(from);
    (from * angle.cos() + perp * angle.sin()).normalize()
}

fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

/// Advance one `task.dt` step.
///
/// The requested acceleration `(v_cmd − v)/dt` is clipped to the platform's
/// budget. Its direction may swing from the previous one by at most
/// `reorientation_rate·dt`; only the component of the request along the
/// reachable direction is applied. Speed is capped at `v_max`, yaw rate
/// tracks its command within `alpha_z_max`, and position uses the updated
/// velocity.
pub fn step_dynamics(
    state: &VehicleState,
    command: &PlannerCommand,
    profile: &KinodynamicProfile,
    task: &TaskSpec,
) -> VehicleState {
    let dt = task.dt;
    let a_max = max_acceleration(profile);

    let mut request = (command.desired_velocity - state.velocity) / dt;
    let magnitude = request.norm();
    if magnitude > a_max {
        request *= a_max / magnitude;
    }
    let magnitude = magnitude.min(a_max);

    let (applied, direction) = if magnitude < LEVEL_EPS {
        (Vec3::zeros(), Vec3::zeros())
    } else {
        let want = request / magnitude;
        if state.accel_direction.norm() < 0.5 {
            (request, want)
        } else {
            let angle = state.accel_direction.angle(&want);
            let max_turn = reorientation_rate(profile) * dt;
            if angle <= max_turn {
                (request, want)
            } else {
                let dir = rotate_toward(&state.accel_direction, &want, max_turn);
                let along = dir.dot(&want).max(0.0);
                (want * (magnitude * along), dir)
            }
        }
    };

    let mut velocity = state.velocity + applied * dt;
    let speed = velocity.norm();
    if speed > task.v_max {
        velocity *= task.v_max / speed;
    }

    let yaw_step = profile.alpha_z_max * dt;
    let yaw_rate = state.yaw_rate + (command.desired_yaw_rate - state.yaw_rate).clamp(-yaw_step, yaw_step);

    VehicleState {
        position: state.position + velocity * dt,
        velocity,
        yaw: wrap_angle(state.yaw + yaw_rate * dt),
        time: state.time + dt,
        accel_direction: direction,
        yaw_rate,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn quarter_turn_time(alpha: f64) -> f64 {
        2.0 * (FRAC_PI_2 / alpha).sqrt()
    }

    fn profile(twr: f64) -> KinodynamicProfile {
        KinodynamicProfile::new(twr, 100.0, 10.0).unwrap()
    }

    #[test]
    fn euler_step_from_rest() {
        let p = profile(1.0 + 5.0 / STANDARD_GRAVITY);
        assert!((max_acceleration(&p) - 5.0).abs() < 1e-12);
        let s = VehicleState::at_rest(Vec3::new(1.0, 1.0, 1.0), 0.0);
        let next = step_dynamics(&s, &PlannerCommand::velocity(Vec3::new(4.0, 0.0, 0.0)), &p, &TaskSpec::default());
        assert!((next.speed() - 0.1).abs() < 1e-12);
        assert!((next.position.x - (1.0 + 0.1 * 0.02)).abs() < 1e-12);
    }

    #[test]
    fn floor_applies_to_weak_platforms() {
        assert_eq!(max_acceleration(&profile(1.0)), ACCEL_FLOOR);
        assert_eq!(max_acceleration(&profile(1.02)), ACCEL_FLOOR);
    }

    #[test]
    fn matching_command_is_a_fixed_point() {
        let p = profile(2.0);
        let mut s = VehicleState::at_rest(Vec3::new(1.0, 1.0, 1.0), 0.0);
        s.velocity = Vec3::new(1.0, 2.0, 0.0);
        let next = step_dynamics(&s, &PlannerCommand::velocity(s.velocity), &p, &TaskSpec::default());
        assert_eq!(next.velocity, s.velocity);
        assert!((next.position - (s.position + s.velocity * 0.02)).norm() < 1e-15);
    }

    #[test]
    fn reversal_is_delayed_by_reorientation() {
        let p = profile(3.0);
        let task = TaskSpec::default();
        let mut s = VehicleState::at_rest(Vec3::new(5.0, 5.0, 1.0), 0.0);
        s = step_dynamics(&s, &PlannerCommand::velocity(Vec3::new(0.0, 4.0, 0.0)), &p, &task);
        assert!((s.accel_direction - Vec3::y()).norm() < 1e-12);
        let before = s.velocity;
        let after = step_dynamics(&s, &PlannerCommand::velocity(Vec3::new(0.0, -4.0, 0.0)), &p, &task);
        assert_eq!(after.velocity, before);
        let turned = s.accel_direction.angle(&after.accel_direction);
        assert!((turned - reorientation_rate(&p) * task.dt).abs() < 1e-9);
        let rate = reorientation_rate(&p);
        assert!((FRAC_PI_2 / rate - quarter_turn_time(100.0)).abs() < 1e-12);
    }

    #[test]
    fn yaw_rate_is_slew_limited() {
        let p = profile(2.0);
        let s = VehicleState::at_rest(Vec3::new(1.0, 1.0, 1.0), 3.1);
        let cmd = PlannerCommand { desired_velocity: Vec3::zeros(), desired_yaw_rate: 5.0 };
        let next = step_dynamics(&s, &cmd, &p, &TaskSpec::default());
        assert!((next.yaw_rate - 10.0 * 0.02).abs() < 1e-12);
        assert!(next.yaw > -PI && next.yaw <= PI);
    }
}
