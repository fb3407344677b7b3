use proptest::prelude::*;
use quadbench::geometry::{voxel_bounds, Obstacle};
use quadbench::scenegen::{Family, OccupancyGrid};
use quadbench::Vec3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const VEHICLE_RADIUS: f64 = 0.3;
const TOL: f64 = 1e-9;

fn family() -> impl Strategy<Value = Family> {
    prop::sample::select(Family::ALL.to_vec())
}

/// A uniformly drawn point inside the primitive (or one of its voxels).
fn interior_point(o: &Obstacle, rng: &mut ChaCha8Rng) -> Vec3 {
    match o {
        Obstacle::Box { min, max } => Vec3::new(
            rng.random_range(min.x..max.x),
            rng.random_range(min.y..max.y),
            rng.random_range(min.z..max.z),
        ),
        Obstacle::Cylinder { base, axis, radius, length } => {
            let helper = if axis.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
            let u = axis.cross(&helper).normalize();
            let v = axis.cross(&u);
            let r = radius * rng.random::<f64>().sqrt();
            let phi = rng.random_range(0.0..std::f64::consts::TAU);
            base + axis * rng.random_range(0.0..*length) + u * (r * phi.cos()) + v * (r * phi.sin())
        }
        Obstacle::VoxelSet { voxel_size, cells } => {
            let (lo, hi) = voxel_bounds(*voxel_size, cells[rng.random_range(0..cells.len())]);
            Vec3::new(rng.random_range(lo.x..hi.x), rng.random_range(lo.y..hi.y), rng.random_range(lo.z..hi.z))
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generation_is_pure(f in family(), seed in any::<u64>(), index in 1u32..=10) {
        prop_assert_eq!(f.generate(seed, index).unwrap(), f.generate(seed, index).unwrap());
    }

    #[test]
    fn obstacles_stay_inside_and_above_floor(f in family(), seed in any::<u64>(), index in 1u32..=10) {
        let s = f.generate(seed, index).unwrap();
        for o in &s.obstacles {
            prop_assert!(o.is_well_formed());
            let bb = o.aabb();
            prop_assert!(bb.min.z >= -TOL, "{:?} dips below the floor", o);
            prop_assert!(bb.min.x >= -TOL && bb.min.y >= -TOL);
            prop_assert!(bb.max.x <= s.width() + TOL && bb.max.y <= s.length() + TOL);
            prop_assert!(bb.max.z <= s.ceiling + TOL);
        }
    }

    #[test]
    fn start_and_goal_are_clear(f in family(), seed in any::<u64>(), index in 1u32..=10) {
        let s = f.generate(seed, index).unwrap();
        prop_assert!(s.obstacle_distance(&s.start_position()) >= VEHICLE_RADIUS);
        prop_assert!(s.obstacle_distance(&s.goal) >= VEHICLE_RADIUS);
    }

    #[test]
    fn rasterization_is_conservative(f in family(), seed in any::<u64>(), index in 1u32..=10) {
        let s = f.generate(seed, index).unwrap();
        prop_assume!(!s.obstacles.is_empty());
        let grid = OccupancyGrid::from_scene(&s, f.validation_resolution());
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ index as u64);
        for _ in 0..1000 {
            let o = &s.obstacles[rng.random_range(0..s.obstacles.len())];
            let p = interior_point(o, &mut rng);
            if grid.cell_of(&p).is_some() {
                prop_assert!(grid.is_occupied_at(&p), "{:?} inside {:?} not marked", p, o);
            }
        }
    }
}
