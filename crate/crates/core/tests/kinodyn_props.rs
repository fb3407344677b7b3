use proptest::prelude::*;
use quadbench::kinodyn::{
    torque_max, twr_max, Layout, RigidBody, RotorSet, STANDARD_GRAVITY,
};

fn rig(layout: Layout, ct: f64, cm: f64, d: f64, omega: [f64; 4]) -> RotorSet {
    RotorSet::new(layout, ct, cm, d, omega).unwrap()
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

fn omegas() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(200.0..3000.0f64)
}

proptest! {
    #[test]
    fn yaw_torque_independent_of_layout(ct in 1e-7..1e-5f64, cm in 1e-9..1e-6f64, d in 0.05..0.5f64, w in omegas()) {
        let plus = torque_max(&rig(Layout::Plus, ct, cm, d, w));
        let cross = torque_max(&rig(Layout::Cross, ct, cm, d, w));
        prop_assert_eq!(plus[2], cross[2]);
    }

    #[test]
    fn cross_roll_is_root_two_plus(ct in 1e-7..1e-5f64, cm in 1e-9..1e-6f64, d in 0.05..0.5f64, w in 200.0..3000.0f64) {
        let plus = torque_max(&rig(Layout::Plus, ct, cm, d, [w; 4]));
        let cross = torque_max(&rig(Layout::Cross, ct, cm, d, [w; 4]));
        prop_assert!(rel_close(cross[0], 2f64.sqrt() * plus[0], 1e-9));
    }

    #[test]
    fn faster_rotor_never_hurts(
        layout in prop_oneof![Just(Layout::Plus), Just(Layout::Cross)],
        w in omegas(),
        i in 0usize..4,
        boost in 1.0..2.0f64,
    ) {
        let body = RigidBody::new(1.0, [0.01, 0.01, 0.02]).unwrap();
        let base = rig(layout, 2e-6, 3e-8, 0.2, w);
        let mut faster = w;
        faster[i] *= boost;
        let up = rig(layout, 2e-6, 3e-8, 0.2, faster);
        prop_assert!(twr_max(&up, &body, STANDARD_GRAVITY).unwrap() >= twr_max(&base, &body, STANDARD_GRAVITY).unwrap());
        let (t0, t1) = (torque_max(&base), torque_max(&up));
        for k in 0..3 {
            prop_assert!(t1[k] >= t0[k] - 1e-15 * t0[k].abs());
        }
    }

    #[test]
    fn speed_scaling_is_quadratic(
        layout in prop_oneof![Just(Layout::Plus), Just(Layout::Cross)],
        w in omegas(),
        k in 0.2..5.0f64,
    ) {
        let body = RigidBody::new(1.3, [0.012, 0.014, 0.025]).unwrap();
        let base = rig(layout, 2e-6, 3e-8, 0.2, w);
        let scaled = rig(layout, 2e-6, 3e-8, 0.2, w.map(|x| x * k));
        let t0 = twr_max(&base, &body, STANDARD_GRAVITY).unwrap();
        let t1 = twr_max(&scaled, &body, STANDARD_GRAVITY).unwrap();
        prop_assert!(rel_close(t1, k * k * t0, 1e-9));
        let (q0, q1) = (torque_max(&base), torque_max(&scaled));
        for c in 0..3 {
            prop_assert!(rel_close(q1[c], k * k * q0[c], 1e-9));
        }
    }

    #[test]
    fn thrust_ratio_ignores_rotor_order(w in omegas(), perm in Just([0usize, 1, 2, 3]).prop_shuffle()) {
        let body = RigidBody::new(0.9, [0.01, 0.01, 0.02]).unwrap();
        let shuffled = [w[perm[0]], w[perm[1]], w[perm[2]], w[perm[3]]];
        let a = twr_max(&rig(Layout::Cross, 2e-6, 3e-8, 0.2, w), &body, STANDARD_GRAVITY).unwrap();
        let b = twr_max(&rig(Layout::Cross, 2e-6, 3e-8, 0.2, shuffled), &body, STANDARD_GRAVITY).unwrap();
        prop_assert!(rel_close(a, b, 1e-12));
    }
}
