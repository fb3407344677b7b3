use proptest::prelude::*;
use quadbench::kinodyn::{load_platform_dataset, KinodynamicProfile};
use quadbench::scenegen::{Family, Scene};
use quadbench::sim::{
    max_acceleration, run_trial, run_trial_in, straight_flight_planner, Outcome, Planner, ReferencePlanner,
    SceneEnv, TaskSpec, TrialOptions,
};
use quadbench::Vec3;

fn any_profile() -> impl Strategy<Value = KinodynamicProfile> {
    prop::sample::select(load_platform_dataset()).prop_map(|r| r.profile)
}

fn any_family() -> impl Strategy<Value = Family> {
    prop::sample::select(Family::ALL.to_vec())
}

fn planner(reference: bool) -> Box<dyn Planner> {
    if reference {
        Box::new(ReferencePlanner::default())
    } else {
        Box::new(straight_flight_planner())
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn logged_states_respect_limits(
        profile in any_profile(),
        family in any_family(),
        index in 1u32..=10,
        reference in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let task = TaskSpec::default();
        let env = SceneEnv::new(family.generate(3, index).unwrap());
        let options = TrialOptions { record_log: true, ..TrialOptions::default() };
        let res = run_trial_in(planner(reference).as_mut(), &env, &profile, &task, seed, &options).unwrap();
        let dv_max = max_acceleration(&profile) * task.dt + 1e-9;
        for row in &res.log {
            prop_assert!(Vec3::new(row.vx, row.vy, row.vz).norm() <= task.v_max + 1e-9);
        }
        for w in res.log.windows(2) {
            let dv = Vec3::new(w[1].vx - w[0].vx, w[1].vy - w[0].vy, w[1].vz - w[0].vz).norm();
            prop_assert!(dv <= dv_max, "dv {} over {}", dv, dv_max);
        }

        match res.outcome {
            Outcome::Success => {
                prop_assert!((res.final_state.position - env.scene().goal).norm() <= task.goal_radius);
                prop_assert!(res.final_state.speed() <= task.settle_speed);
                prop_assert!(res.elapsed <= task.t_max + 1e-9);
            }
            Outcome::Collision => prop_assert!(res.min_clearance <= 0.0, "min clearance {}", res.min_clearance),
            Outcome::Timeout => prop_assert!(res.elapsed > task.t_max),
            _ => {}
        }
    }

    #[test]
    fn trials_are_deterministic(
        profile in any_profile(),
        family in any_family(),
        index in 1u32..=10,
        reference in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let scene = family.generate(11, index).unwrap();
        let task = TaskSpec::default();
        let a = run_trial(planner(reference).as_mut(), &scene, &profile, &task, seed).unwrap();
        let b = run_trial(planner(reference).as_mut(), &scene, &profile, &task, seed).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn stronger_thrust_is_never_slower(
        twr in 1.02..4.0f64,
        extra in 0.0..2.0f64,
        alpha_xy in 20.0..2000.0f64,
        family in any_family(),
    ) {
        let scene = Scene::empty(family, 0, 1);
        let task = TaskSpec::default();
        let weak = KinodynamicProfile::new(twr, alpha_xy, 10.0).unwrap();
        let strong = KinodynamicProfile::new(twr + extra, alpha_xy, 10.0).unwrap();
        let slow = run_trial(&mut straight_flight_planner(), &scene, &weak, &task, 0).unwrap();
        let fast = run_trial(&mut straight_flight_planner(), &scene, &strong, &task, 0).unwrap();
        prop_assert_eq!(fast.outcome, Outcome::Success);
        prop_assert!(fast.elapsed <= slow.elapsed + 1e-9, "{} vs {}", fast.elapsed, slow.elapsed);
    }
}
