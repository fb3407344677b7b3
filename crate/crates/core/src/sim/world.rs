use crate::geometry::{box_sdf, voxel_bounds, Aabb, Obstacle, Vec3};
use crate::scenegen::Scene;

/// Scene prepared for repeated exact distance queries.
///
/// Analytic primitives are culled by bounding box; voxel sets are looked up in
/// a dense occupancy lattice so only voxels near the query are visited.
#[derive(Debug, Clone)]
pub struct CollisionWorld {
    width: f64,
    length: f64,
    ceiling: f64,
    primitives: Vec<(Aabb, Obstacle)>,
    voxels: Vec<VoxelLattice>,
}

#[derive(Debug, Clone)]
struct VoxelLattice {
    size: f64,
    lo: [i32; 3],
    dims: [i32; 3],
    occupied: Vec<bool>,
}

impl VoxelLattice {
    fn new(size: f64, cells: &[[i32; 3]]) -> Option<Self> {
        if cells.is_empty() {
            return None;
        }
        let mut lo = [i32::MAX; 3];
        let mut hi = [i32::MIN; 3];
        for c in cells {
            for k in 0..3 {
                lo[k] = lo[k].min(c[k]);
                hi[k] = hi[k].max(c[k]);
            }
        }
        let dims = [0, 1, 2].map(|k| hi[k] - lo[k] + 1);
        let mut occupied = vec![false; (dims[0] * dims[1] * dims[2]) as usize];
        let mut lattice = VoxelLattice { size, lo, dims, occupied: Vec::new() };
        for c in cells {
            occupied[lattice.flat(*c).expect("cell inside its own bounds")] = true;
        }
        lattice.occupied = occupied;
        Some(lattice)
    }

    fn flat(&self, c: [i32; 3]) -> Option<usize> {
        let mut rel = [0; 3];
        for k in 0..3 {
            rel[k] = c[k] - self.lo[k];
            if rel[k] < 0 || rel[k] >= self.dims[k] {
                return None;
            }
        }
        Some(((rel[2] * self.dims[1] + rel[1]) * self.dims[0] + rel[0]) as usize)
    }

    fn visit(&self, p: &Vec3, c: [i32; 3], best: &mut f64) {
        if let Some(n) = self.flat(c) {
            if self.occupied[n] {
                let (lo, hi) = voxel_bounds(self.size, c);
                *best = best.min(box_sdf(p, &lo, &hi));
            }
        }
    }

    /// Visits Chebyshev shells around the containing cell; a shell at index
    /// distance `ring` is at least `(ring − 1)·size` away.
    fn distance(&self, p: &Vec3, cutoff: f64) -> f64 {
        let reach = (cutoff / self.size).ceil() as i32 + 1;
        let [ci, cj, ck] = [0, 1, 2].map(|k| (p[k] / self.size).floor() as i32);
        let mut best = cutoff;
        for ring in 0..=reach {
            if (ring - 1) as f64 * self.size >= best {
                break;
            }
            for di in -ring..=ring {
                for dj in -ring..=ring {
                    if di.abs() == ring || dj.abs() == ring {
                        for dk in -ring..=ring {
                            self.visit(p, [ci + di, cj + dj, ck + dk], &mut best);
                        }
                    } else {
                        self.visit(p, [ci + di, cj + dj, ck - ring], &mut best);
                        if ring > 0 {
                            self.visit(p, [ci + di, cj + dj, ck + ring], &mut best);
                        }
                    }
                }
            }
        }
        best
    }
}

impl CollisionWorld {
    pub fn new(scene: &Scene) -> Self {
        let mut primitives = Vec::new();
        let mut voxels = Vec::new();
        for o in &scene.obstacles {
            match o {
                Obstacle::VoxelSet { voxel_size, cells } => voxels.extend(VoxelLattice::new(*voxel_size, cells)),
                _ => primitives.push((o.aabb(), o.clone())),
            }
        }
        CollisionWorld { width: scene.width(), length: scene.length(), ceiling: scene.ceiling, primitives, voxels }
    }

    /// Signed distance to the nearest obstacle, saturated at `cutoff`.
    pub fn obstacle_distance(&self, p: &Vec3, cutoff: f64) -> f64 {
        let mut best = cutoff;
        for (bb, o) in &self.primitives {
            if bb.expanded(best).contains(p) {
                best = best.min(o.signed_distance(p));
            }
        }
        for v in &self.voxels {
            best = best.min(v.distance(p, best));
        }
        best
    }

    /// Remaining margin before contact for a sphere of `radius` at `p`:
    /// obstacle distance minus radius, height above `radius`, headroom to the
    /// ceiling, and distance to the horizontal arena edge. Non-positive means
    /// contact. Saturates at `cutoff`.
    pub fn clearance(&self, p: &Vec3, radius: f64, cutoff: f64) -> f64 {
        let surfaces = (p.z - radius)
            .min(self.ceiling - p.z)
            .min(p.x)
            .min(self.width - p.x)
            .min(p.y)
            .min(self.length - p.y);
        let obstacle = self.obstacle_distance(p, cutoff + radius) - radius;
        surfaces.min(obstacle).min(cutoff)
    }

    pub fn collides(&self, p: &Vec3, radius: f64) -> bool {
        if p.z < radius || p.z > self.ceiling || p.x < 0.0 || p.x > self.width || p.y < 0.0 || p.y > self.length {
            return true;
        }
        self.obstacle_distance(p, radius + 1.0) <= radius
    }
}

/// Whether a vehicle sphere at `position` touches any obstacle, the floor band
/// below `vehicle_radius`, the region above the ceiling or the arena edge.
pub fn check_collision(scene: &Scene, position: &Vec3, vehicle_radius: f64) -> bool {
    if position.z < vehicle_radius
        || position.z > scene.ceiling
        || position.x < 0.0
        || position.x > scene.width()
        || position.y < 0.0
        || position.y > scene.length()
    {
        return true;
    }
    scene.obstacles.iter().any(|o| o.signed_distance(position) <= vehicle_radius)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenegen::{gen_perlin, Family};

    fn pillar_scene() -> Scene {
        let mut s = Scene::empty(Family::Forest, 0, 1);
        s.obstacles.push(Obstacle::cylinder(Vec3::new(20.0, 30.0, 0.0), Vec3::z(), 0.5, 3.0));
        s
    }

    #[test]
    fn free_space_and_containment() {
        let empty = Scene::empty(Family::Forest, 0, 1);
        assert!(!check_collision(&empty, &Vec3::new(10.0, 10.0, 1.0), 0.3));
        let s = pillar_scene();
        assert!(check_collision(&s, &Vec3::new(20.0, 30.0, 1.0), 0.3));
    }

    #[test]
    fn cylinder_contact_boundary() {
        let s = pillar_scene();
        let at = Vec3::new(20.0 + 0.5 + 0.25, 30.0, 1.0);
        let beyond = at + Vec3::new(1e-6, 0.0, 0.0);
        assert!(check_collision(&s, &at, 0.25));
        assert!(!check_collision(&s, &beyond, 0.25));
        let w = CollisionWorld::new(&s);
        assert!(w.collides(&at, 0.25));
        assert!(!w.collides(&beyond, 0.25));
    }

    #[test]
    fn floor_and_ceiling_are_surfaces() {
        let s = Scene::empty(Family::Forest, 0, 1);
        assert!(check_collision(&s, &Vec3::new(5.0, 5.0, 0.2), 0.3));
        assert!(check_collision(&s, &Vec3::new(5.0, 5.0, 3.01), 0.3));
        assert!(!check_collision(&s, &Vec3::new(5.0, 5.0, 2.99), 0.3));
    }

    #[test]
    fn world_matches_brute_force_on_voxels() {
        let scene = gen_perlin(2, 1).unwrap();
        let w = CollisionWorld::new(&scene);
        for i in 0..400 {
            let p = Vec3::new(
                (i as f64 * 7.31) % scene.width(),
                (i as f64 * 3.17) % scene.length(),
                0.3 + (i as f64 * 0.37) % 3.5,
            );
            let brute = scene.obstacle_distance(&p).min(2.0);
            let fast = w.obstacle_distance(&p, 2.0);
            assert!((brute - fast).abs() < 1e-12, "{p:?}: {brute} vs {fast}");
            assert_eq!(check_collision(&scene, &p, 0.3), w.collides(&p, 0.3));
        }
    }
}
