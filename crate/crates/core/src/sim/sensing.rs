use std::collections::HashMap;

use crate::geometry::Vec3;

/// Uniform spatial hash over a fixed point set for radius queries.
#[derive(Debug, Clone)]
pub struct PointIndex {
    cell: f64,
    points: Vec<Vec3>,
    buckets: HashMap<[i32; 3], Vec<u32>>,
}

impl PointIndex {
    pub fn new(points: Vec<Vec3>, cell: f64) -> Self {
        assert!(cell > 0.0);
        let mut buckets: HashMap<[i32; 3], Vec<u32>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            buckets.entry(Self::key(cell, p)).or_default().push(i as u32);
        }
        PointIndex { cell, points, buckets }
    }

    fn key(cell: f64, p: &Vec3) -> [i32; 3] {
        [0, 1, 2].map(|k| (p[k] / cell).floor() as i32)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, id: u32) -> Vec3 {
        self.points[id as usize]
    }

    /// Ids of points within `radius` of `centre`, ascending.
    pub fn within(&self, centre: &Vec3, radius: f64) -> Vec<u32> {
        let lo = Self::key(self.cell, &(centre - Vec3::repeat(radius)));
        let hi = Self::key(self.cell, &(centre + Vec3::repeat(radius)));
        let r2 = radius * radius;
        let mut out = Vec::new();
        for i in lo[0]..=hi[0] {
            for j in lo[1]..=hi[1] {
                for k in lo[2]..=hi[2] {
                    if let Some(ids) = self.buckets.get(&[i, j, k]) {
                        out.extend(ids.iter().copied().filter(|&id| (self.points[id as usize] - centre).norm_squared() <= r2));
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}
