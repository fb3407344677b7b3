//! Obstacle primitives and exact point distances.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

pub type Vec3 = Vector3<f64>;

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn expanded(&self, margin: f64) -> Aabb {
        let m = Vec3::repeat(margin);
        Aabb { min: self.min - m, max: self.max + m }
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        (0..3).all(|k| p[k] >= self.min[k] && p[k] <= self.max[k])
    }
}

/// A solid obstacle. Voxel cells `(i, j, k)` cover
/// `[i·s, (i+1)·s] × [j·s, (j+1)·s] × [k·s, (k+1)·s]` in scene coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Obstacle {
    Cylinder { base: Vec3, axis: Vec3, radius: f64, length: f64 },
    Box { min: Vec3, max: Vec3 },
    VoxelSet { voxel_size: f64, cells: Vec<[i32; 3]> },
}

impl Obstacle {
    pub fn cylinder(base: Vec3, axis: Vec3, radius: f64, length: f64) -> Obstacle {
        Obstacle::Cylinder { base, axis: axis.normalize(), radius, length }
    }

    pub fn aabb_box(min: Vec3, max: Vec3) -> Obstacle {
        Obstacle::Box { min, max }
    }

    /// Checks the constructor invariants (positive radius/length, unit axis,
    /// ordered box corners, positive voxel size).
    pub fn is_well_formed(&self) -> bool {
        match self {
            Obstacle::Cylinder { axis, radius, length, .. } => {
                *radius > 0.0 && *length > 0.0 && (axis.norm() - 1.0).abs() <= 1e-9
            }
            Obstacle::Box { min, max } => (0..3).all(|k| min[k] < max[k]),
            Obstacle::VoxelSet { voxel_size, .. } => *voxel_size > 0.0,
        }
    }

    pub fn aabb(&self) -> Aabb {
        match self {
            Obstacle::Cylinder { base, axis, radius, length } => cylinder_aabb(base, axis, *radius, *length),
            Obstacle::Box { min, max } => Aabb { min: *min, max: *max },
            Obstacle::VoxelSet { voxel_size, cells } => {
                if cells.is_empty() {
                    return Aabb { min: Vec3::zeros(), max: Vec3::zeros() };
                }
                let mut lo = [i32::MAX; 3];
                let mut hi = [i32::MIN; 3];
                for c in cells {
                    for k in 0..3 {
                        lo[k] = lo[k].min(c[k]);
                        hi[k] = hi[k].max(c[k]);
                    }
                }
                let s = *voxel_size;
                Aabb {
                    min: Vec3::new(lo[0] as f64 * s, lo[1] as f64 * s, lo[2] as f64 * s),
                    max: Vec3::new((hi[0] + 1) as f64 * s, (hi[1] + 1) as f64 * s, (hi[2] + 1) as f64 * s),
                }
            }
        }
    }

    /// Signed distance from `p` to the solid (negative inside).
    ///
    /// Voxel sets are scanned exhaustively here; use
    /// [`crate::sim::CollisionWorld`] for repeated queries.
    pub fn signed_distance(&self, p: &Vec3) -> f64 {
        match self {
            Obstacle::Cylinder { base, axis, radius, length } => cylinder_sdf(p, base, axis, *radius, *length),
            Obstacle::Box { min, max } => box_sdf(p, min, max),
            Obstacle::VoxelSet { voxel_size, cells } => cells
                .iter()
                .map(|c| {
                    let (lo, hi) = voxel_bounds(*voxel_size, *c);
                    box_sdf(p, &lo, &hi)
                })
                .fold(f64::INFINITY, f64::min),
        }
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        self.signed_distance(p) <= 0.0
    }
}

pub fn voxel_bounds(size: f64, c: [i32; 3]) -> (Vec3, Vec3) {
    let lo = Vec3::new(c[0] as f64 * size, c[1] as f64 * size, c[2] as f64 * size);
    (lo, lo + Vec3::repeat(size))
}

/// Exact AABB of a finite flat-capped cylinder.
pub fn cylinder_aabb(base: &Vec3, axis: &Vec3, radius: f64, length: f64) -> Aabb {
    let top = base + axis * length;
    let mut min = Vec3::zeros();
    let mut max = Vec3::zeros();
    for k in 0..3 {
        let cap = radius * (1.0 - axis[k] * axis[k]).max(0.0).sqrt();
        min[k] = base[k].min(top[k]) - cap;
        max[k] = base[k].max(top[k]) + cap;
    }
    Aabb { min, max }
}

pub fn box_sdf(p: &Vec3, min: &Vec3, max: &Vec3) -> f64 {
    let center = (min + max) * 0.5;
    let half = (max - min) * 0.5;
    let q = (p - center).abs() - half;
    let outside = q.map(|v| v.max(0.0)).norm();
    let inside = q.max().min(0.0);
    outside + inside
}

pub fn cylinder_sdf(p: &Vec3, base: &Vec3, axis: &Vec3, radius: f64, length: f64) -> f64 {
    let rel = p - base;
    let h = rel.dot(axis);
    let radial = (rel - axis * h).norm();
    let dr = radial - radius;
    let dh = if h < 0.0 {
        -h
    } else if h > length {
        h - length
    } else {
        -(h.min(length - h))
    };
    if dr <= 0.0 && dh <= 0.0 {
        dr.max(dh)
    } else {
        (dr.max(0.0).powi(2) + dh.max(0.0).powi(2)).sqrt()
    }
}

/// Minimum distance between a point and the segment `[a, b]`.
pub fn point_segment_distance(p: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}
