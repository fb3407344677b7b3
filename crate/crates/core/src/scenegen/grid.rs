use std::collections::VecDeque;

use serde::Serialize;

use super::Scene;
use crate::geometry::{box_sdf, voxel_bounds, Obstacle, Vec3};

/// Dense 3D occupancy over `[0, width] × [0, length] × [0, ceiling]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    resolution: f64,
    dims: [usize; 3],
    bits: Vec<u64>,
}

impl OccupancyGrid {
    pub fn empty(resolution: f64, extent: Vec3) -> Self {
        assert!(resolution > 0.0);
        let dims = [0, 1, 2].map(|k| ((extent[k] / resolution) - 1e-9).ceil().max(1.0) as usize);
        let n = dims[0] * dims[1] * dims[2];
        OccupancyGrid { resolution, dims, bits: vec![0; n.div_ceil(64)] }
    }

    /// Conservative rasterisation: every cell that intersects an obstacle is
    /// occupied.
    pub fn from_scene(scene: &Scene, resolution: f64) -> Self {
        let half_diagonal = resolution * 3f64.sqrt() / 2.0;
        Self::within(scene, resolution, half_diagonal)
    }

    /// Cells whose centre lies within `margin` of an obstacle are occupied.
    pub fn within(scene: &Scene, resolution: f64, margin: f64) -> Self {
        let mut grid = Self::empty(resolution, Vec3::new(scene.width(), scene.length(), scene.ceiling));
        for o in &scene.obstacles {
            match o {
                Obstacle::VoxelSet { voxel_size, cells } => {
                    for c in cells {
                        let (lo, hi) = voxel_bounds(*voxel_size, *c);
                        grid.mark_region(lo, hi, margin, |p| box_sdf(p, &lo, &hi));
                    }
                }
                _ => {
                    let bb = o.aabb();
                    grid.mark_region(bb.min, bb.max, margin, |p| o.signed_distance(p));
                }
            }
        }
        grid
    }

    fn mark_region<F: Fn(&Vec3) -> f64>(&mut self, lo: Vec3, hi: Vec3, margin: f64, sdf: F) {
        let Some((a, b)) = self.index_range(lo - Vec3::repeat(margin), hi + Vec3::repeat(margin)) else {
            return;
        };
        for i in a[0]..=b[0] {
            for j in a[1]..=b[1] {
                for k in a[2]..=b[2] {
                    if !self.get(i, j, k) && sdf(&self.centre(i, j, k)) <= margin {
                        self.set(i, j, k);
                    }
                }
            }
        }
    }

    fn index_range(&self, lo: Vec3, hi: Vec3) -> Option<([usize; 3], [usize; 3])> {
        let mut a = [0; 3];
        let mut b = [0; 3];
        for k in 0..3 {
            let l = (lo[k] / self.resolution).floor().max(0.0);
            let h = (hi[k] / self.resolution).floor().min(self.dims[k] as f64 - 1.0);
            if h < l {
                return None;
            }
            a[k] = l as usize;
            b[k] = h as usize;
        }
        Some((a, b))
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    fn flat(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.dims[1] + j) * self.dims[0] + i
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> bool {
        let n = self.flat(i, j, k);
        self.bits[n / 64] >> (n % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize) {
        let n = self.flat(i, j, k);
        self.bits[n / 64] |= 1 << (n % 64);
    }

    pub fn centre(&self, i: usize, j: usize, k: usize) -> Vec3 {
        Vec3::new(i as f64 + 0.5, j as f64 + 0.5, k as f64 + 0.5) * self.resolution
    }

    /// Cell containing `p`, if inside the grid.
    pub fn cell_of(&self, p: &Vec3) -> Option<[usize; 3]> {
        let mut out = [0; 3];
        for k in 0..3 {
            let v = (p[k] / self.resolution).floor();
            if v < 0.0 || v >= self.dims[k] as f64 {
                return None;
            }
            out[k] = v as usize;
        }
        Some(out)
    }

    pub fn is_occupied_at(&self, p: &Vec3) -> bool {
        self.cell_of(p).is_some_and(|[i, j, k]| self.get(i, j, k))
    }

    pub fn occupied_count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum Solvability {
    Solvable { path_length: f64 },
    Unsolvable,
}

impl Solvability {
    pub fn is_solvable(&self) -> bool {
        matches!(self, Solvability::Solvable { .. })
    }
}

/// Flood-fill check that a vehicle of `vehicle_radius` can reach the goal,
/// at the family's validation resolution.
pub fn validate_scene(scene: &Scene, vehicle_radius: f64) -> Solvability {
    validate_scene_at(scene, vehicle_radius, scene.family.validation_resolution())
}

/// Free cells are those whose centre keeps `vehicle_radius` from every
/// obstacle and lies within `[vehicle_radius, ceiling]` vertically. The
/// search is 6-connected; the reported length follows the BFS path.
pub fn validate_scene_at(scene: &Scene, vehicle_radius: f64, resolution: f64) -> Solvability {
    let mut grid = OccupancyGrid::within(scene, resolution, vehicle_radius);
    let [nx, ny, nz] = grid.dims();
    for k in 0..nz {
        let z = (k as f64 + 0.5) * resolution;
        if z < vehicle_radius || z > scene.ceiling {
            for j in 0..ny {
                for i in 0..nx {
                    grid.set(i, j, k);
                }
            }
        }
    }
    let (Some(s), Some(g)) = (grid.cell_of(&scene.start_position()), grid.cell_of(&scene.goal)) else {
        return Solvability::Unsolvable;
    };
    if grid.get(s[0], s[1], s[2]) || grid.get(g[0], g[1], g[2]) {
        return Solvability::Unsolvable;
    }

    const UNSEEN: u8 = u8::MAX;
    const ROOT: u8 = 6;
    let steps: [(isize, isize, isize); 6] = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)];
    let mut via = vec![UNSEEN; grid.len()];
    let flat = |c: [usize; 3]| (c[2] * ny + c[1]) * nx + c[0];
    via[flat(s)] = ROOT;
    let mut queue = VecDeque::from([s]);
    let mut found = false;
    while let Some(c) = queue.pop_front() {
        if c == g {
            found = true;
            break;
        }
        for (d, (di, dj, dk)) in steps.iter().enumerate() {
            let (i, j, k) = (c[0] as isize + di, c[1] as isize + dj, c[2] as isize + dk);
            if i < 0 || j < 0 || k < 0 || i >= nx as isize || j >= ny as isize || k >= nz as isize {
                continue;
            }
            let n = [i as usize, j as usize, k as usize];
            let f = flat(n);
            if via[f] == UNSEEN && !grid.get(n[0], n[1], n[2]) {
                via[f] = d as u8;
                queue.push_back(n);
            }
        }
    }
    if !found {
        return Solvability::Unsolvable;
    }

    let mut length = 0.0;
    let mut cur = g;
    let mut prev_point = scene.goal;
    while via[flat(cur)] != ROOT {
        let centre = grid.centre(cur[0], cur[1], cur[2]);
        length += (prev_point - centre).norm();
        prev_point = centre;
        let (di, dj, dk) = steps[via[flat(cur)] as usize];
        cur = [(cur[0] as isize - di) as usize, (cur[1] as isize - dj) as usize, (cur[2] as isize - dk) as usize];
    }
    let centre = grid.centre(cur[0], cur[1], cur[2]);
    length += (prev_point - centre).norm() + (centre - scene.start_position()).norm();
    Solvability::Solvable { path_length: length }
}
