use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::maze::PerfectMaze;
use super::perlin::{fill_threshold, PerlinNoise};
use super::{check_index, grid, Family, Pose, Scene, ScenegenError, START_GOAL_CLEARANCE};
use crate::geometry::{cylinder_aabb, Obstacle, Vec3};
use crate::seed::SeedBuilder;

/// Trees per square metre.
pub const FOREST_DENSITY: f64 = 1.0 / 49.0;
/// Tilted cylinders per square metre.
pub const CYLINDER_DENSITY: f64 = 1.0 / 36.0;

const FOREST_RADIUS: (f64, f64) = (0.15, 0.35);
const CYLINDER_RADIUS: (f64, f64) = (0.25, 0.5);
const CYLINDER_MAX_LENGTH: f64 = 6.0;
/// Cylinders centred on the reference path. The rest are placed uniformly.
const CYLINDERS_ON_PATH: usize = 3;

const URBAN_MIN_SPACING: f64 = 12.0;
const URBAN_DART_ATTEMPTS: usize = 600;
const URBAN_FOOTPRINT: (f64, f64) = (3.0, 10.0);
const URBAN_HEIGHT: (f64, f64) = (3.0, 10.0);
const URBAN_LAYOUT_RETRIES: usize = 20;

pub(crate) const GAP_WIDTH: (f64, f64) = (0.85, 0.9);
const GAP_WALL_THICKNESS: f64 = 0.2;
/// Gaps stay this far from the side walls.
const GAP_SIDE_MARGIN: f64 = 1.0;

const DROP_SLABS_PER_INDEX: usize = 2;
pub(crate) const DROP_MIN_UNDERSIDE: f64 = 1.5;
const DROP_UNDERSIDE: (f64, f64) = (DROP_MIN_UNDERSIDE, 2.0);
const DROP_DEPTH: (f64, f64) = (2.0, 5.0);
const DROP_END_MARGIN: f64 = 6.0;

pub(crate) const MAZE_CELL: f64 = 2.5;
const MAZE_WALL_THICKNESS: f64 = 0.25;

pub(crate) const PERLIN_VOXEL: f64 = 0.25;
/// Noise cycles per metre: 0.05 cycles per step of a 0.1 m sampling grid,
/// evaluated here on the coarser collision voxels.
pub(crate) const PERLIN_FREQUENCY: f64 = 0.5;
pub(crate) const PERLIN_FILL: f64 = 0.03;
pub(crate) const PERLIN_FILL_TOLERANCE: f64 = 0.005;
const PERLIN_CLEAR_RADIUS: f64 = 1.5;

const PLACEMENT_ATTEMPTS: usize = 10_000;
/// Validation radius the generators guarantee solvability for.
const GENERATOR_VEHICLE_RADIUS: f64 = 0.3;

fn scene_rng(family: Family, seed: u64, index: u32) -> ChaCha8Rng {
    SeedBuilder::new(seed).label(family.as_str()).int(u64::from(index)).rng()
}

fn uniform<R: Rng>(rng: &mut R, range: (f64, f64)) -> f64 {
    rng.random_range(range.0..=range.1)
}

fn start_goal_clear(scene: &Scene, obstacle: &Obstacle) -> bool {
    obstacle.signed_distance(&scene.start_position()) >= START_GOAL_CLEARANCE
        && obstacle.signed_distance(&scene.goal) >= START_GOAL_CLEARANCE
}

/// Number of obstacles implied by an areal density, rounded down.
pub(crate) fn density_count(bounds: [f64; 2], density: f64) -> usize {
    // Guard against 40·60/36 landing a hair under an integer.
    (bounds[0] * bounds[1] * density + 1e-9).floor() as usize
}

/// Vertical cylinders of random radius reaching the ceiling.
pub fn gen_forest(seed: u64, index: u32) -> Result<Scene, ScenegenError> {
    check_index(index)?;
    let family = Family::Forest;
    let mut rng = scene_rng(family, seed, index);
    let mut scene = Scene::empty(family, seed, index);
    let count = density_count(scene.bounds, FOREST_DENSITY);
    for _ in 0..count {
        let tree = place(&scene, family, &mut rng, |scene, rng| {
            let r = uniform(rng, FOREST_RADIUS);
            let x = rng.random_range(r..scene.width() - r);
            let y = rng.random_range(r..scene.length() - r);
            Some(Obstacle::cylinder(Vec3::new(x, y, 0.0), Vec3::z(), r, scene.ceiling))
        })?;
        scene.obstacles.push(tree);
    }
    Ok(scene)
}

fn place<F>(scene: &Scene, family: Family, rng: &mut ChaCha8Rng, mut propose: F) -> Result<Obstacle, ScenegenError>
where
    F: FnMut(&Scene, &mut ChaCha8Rng) -> Option<Obstacle>,
{
    for _ in 0..PLACEMENT_ATTEMPTS {
        match propose(scene, rng) {
            Some(o) if start_goal_clear(scene, &o) => return Ok(o),
            _ => {}
        }
    }
    Err(ScenegenError::Placement { family, attempts: PLACEMENT_ATTEMPTS })
}

/// Axis-aligned buildings on a dart-throwing Poisson-disk layout.
///
/// Layouts that leave no corridor between start and goal are redrawn.
pub fn gen_urban(seed: u64, index: u32) -> Result<Scene, ScenegenError> {
    check_index(index)?;
    let family = Family::Urban;
    let mut rng = scene_rng(family, seed, index);
    for _ in 0..URBAN_LAYOUT_RETRIES {
        let mut scene = Scene::empty(family, seed, index);
        let mut centres: Vec<(f64, f64)> = Vec::new();
        for _ in 0..URBAN_DART_ATTEMPTS {
            let sx = uniform(&mut rng, URBAN_FOOTPRINT);
            let sy = uniform(&mut rng, URBAN_FOOTPRINT);
            let h = uniform(&mut rng, URBAN_HEIGHT);
            let cx = rng.random_range(sx / 2.0..scene.width() - sx / 2.0);
            let cy = rng.random_range(sy / 2.0..scene.length() - sy / 2.0);
            if centres.iter().any(|&(x, y)| (x - cx).hypot(y - cy) < URBAN_MIN_SPACING) {
                continue;
            }
            let building = Obstacle::aabb_box(
                Vec3::new(cx - sx / 2.0, cy - sy / 2.0, 0.0),
                Vec3::new(cx + sx / 2.0, cy + sy / 2.0, h),
            );
            if !start_goal_clear(&scene, &building) {
                continue;
            }
            centres.push((cx, cy));
            scene.obstacles.push(building);
        }
        if grid::validate_scene(&scene, GENERATOR_VEHICLE_RADIUS).is_solvable() {
            return Ok(scene);
        }
    }
    Err(ScenegenError::Placement { family, attempts: URBAN_LAYOUT_RETRIES })
}

/// Tilted cylinder with tilt measured from vertical, centred at the given
/// altitude band and clipped so the solid stays between floor and ceiling.
fn tilted_cylinder(centre_xy: (f64, f64), ceiling: f64, radius: f64, tilt: f64, azimuth: f64) -> Obstacle {
    let axis = Vec3::new(tilt.sin() * azimuth.cos(), tilt.sin() * azimuth.sin(), tilt.cos());
    let vertical_room = ceiling - 2.0 * radius * tilt.sin();
    let cos = tilt.cos().abs();
    let length = if cos * CYLINDER_MAX_LENGTH <= vertical_room { CYLINDER_MAX_LENGTH } else { vertical_room / cos };
    let centre = Vec3::new(centre_xy.0, centre_xy.1, ceiling / 2.0);
    Obstacle::Cylinder { base: centre - axis * (length / 2.0), axis, radius, length }
}

/// Horizontal half-extents of a tilted cylinder centred at the origin.
fn horizontal_extent(o: &Obstacle) -> (f64, f64) {
    match o {
        Obstacle::Cylinder { base, axis, radius, length } => {
            let bb = cylinder_aabb(base, axis, *radius, *length);
            ((bb.max.x - bb.min.x) / 2.0, (bb.max.y - bb.min.y) / 2.0)
        }
        _ => unreachable!("only used for cylinders"),
    }
}

/// Randomly tilted cylinders; a few sit on the reference path.
pub fn gen_cylinder_field(seed: u64, index: u32) -> Result<Scene, ScenegenError> {
    check_index(index)?;
    let family = Family::CylinderField;
    let mut rng = scene_rng(family, seed, index);
    let mut scene = Scene::empty(family, seed, index);
    let count = density_count(scene.bounds, CYLINDER_DENSITY);
    let path_x = scene.start.x;
    let (path_lo, path_hi) = (scene.start.y + 6.0, scene.goal.y - 6.0);
    for i in 0..count {
        let on_path = i < CYLINDERS_ON_PATH;
        let cyl = place(&scene, family, &mut rng, |scene, rng| {
            let r = uniform(rng, CYLINDER_RADIUS);
            let tilt = rng.random_range(0.0..=PI);
            let azimuth = rng.random_range(0.0..2.0 * PI);
            let probe = tilted_cylinder((0.0, 0.0), scene.ceiling, r, tilt, azimuth);
            let (ex, ey) = horizontal_extent(&probe);
            let (cx, cy) = if on_path {
                (path_x, rng.random_range(path_lo..path_hi))
            } else {
                (rng.random_range(ex..scene.width() - ex), rng.random_range(ey..scene.length() - ey))
            };
            let o = tilted_cylinder((cx, cy), scene.ceiling, r, tilt, azimuth);
            let bb = o.aabb();
            let inside = bb.min.x >= 0.0 && bb.max.x <= scene.width() && bb.min.y >= 0.0 && bb.max.y <= scene.length();
            inside.then_some(o)
        })?;
        scene.obstacles.push(cyl);
    }
    Ok(scene)
}

/// `index` full-width walls evenly spaced along the flight axis, each with a
/// single floor-to-ceiling slot.
pub fn gen_narrow_gap(seed: u64, index: u32) -> Result<Scene, ScenegenError> {
    check_index(index)?;
    let family = Family::NarrowGap;
    let mut rng = scene_rng(family, seed, index);
    let mut scene = Scene::empty(family, seed, index);
    let (w, l, h) = (scene.width(), scene.length(), scene.ceiling);
    let half_t = GAP_WALL_THICKNESS / 2.0;
    for k in 1..=index {
        let y = l * f64::from(k) / f64::from(index + 1);
        let gap = uniform(&mut rng, GAP_WIDTH);
        let centre = rng.random_range(GAP_SIDE_MARGIN + gap / 2.0..w - GAP_SIDE_MARGIN - gap / 2.0);
        scene.obstacles.push(Obstacle::aabb_box(
            Vec3::new(0.0, y - half_t, 0.0),
            Vec3::new(centre - gap / 2.0, y + half_t, h),
        ));
        scene.obstacles.push(Obstacle::aabb_box(
            Vec3::new(centre + gap / 2.0, y - half_t, 0.0),
            Vec3::new(w, y + half_t, h),
        ));
    }
    Ok(scene)
}

/// Full-width overhead slabs hanging from the ceiling down to between 1.5 m
/// and 2 m, so the vehicle must descend beneath them.
pub fn gen_sudden_drop(seed: u64, index: u32) -> Result<Scene, ScenegenError> {
    check_index(index)?;
    let family = Family::SuddenDrop;
    let mut rng = scene_rng(family, seed, index);
    let mut scene = Scene::empty(family, seed, index);
    let (w, l, h) = (scene.width(), scene.length(), scene.ceiling);
    for _ in 0..DROP_SLABS_PER_INDEX * index as usize {
        let depth = uniform(&mut rng, DROP_DEPTH);
        let y0 = rng.random_range(DROP_END_MARGIN..l - DROP_END_MARGIN - depth);
        let underside = uniform(&mut rng, DROP_UNDERSIDE);
        scene.obstacles.push(Obstacle::aabb_box(Vec3::new(0.0, y0, underside), Vec3::new(w, y0 + depth, h)));
    }
    Ok(scene)
}

/// Cell index of the maze start/goal column (nearest the centre line).
pub(crate) fn maze_start_column(cols: usize) -> usize {
    (cols - 1) / 2
}

/// Perfect maze with 2.5 m cells and walls extruded to the 2 m ceiling.
/// Start and goal sit at the centres of the first and last cells of the
/// column nearest the centre line.
pub fn gen_maze(seed: u64, index: u32) -> Result<Scene, ScenegenError> {
    check_index(index)?;
    let family = Family::Maze;
    let mut rng = scene_rng(family, seed, index);
    let mut scene = Scene::empty(family, seed, index);
    let (w, l, h) = (scene.width(), scene.length(), scene.ceiling);
    let cols = (w / MAZE_CELL).round() as usize;
    let rows = (l / MAZE_CELL).round() as usize;
    let col = maze_start_column(cols);
    let maze = PerfectMaze::carve(cols, rows, (col, 0), &mut rng);

    let x = (col as f64 + 0.5) * MAZE_CELL;
    scene.start = Pose { x, y: 0.5 * MAZE_CELL, ..scene.start };
    scene.goal = Vec3::new(x, (rows as f64 - 0.5) * MAZE_CELL, scene.goal.z);

    let t = MAZE_WALL_THICKNESS / 2.0;
    let wall = |x0: f64, y0: f64, x1: f64, y1: f64| {
        Obstacle::aabb_box(Vec3::new(x0.max(0.0), y0.max(0.0), 0.0), Vec3::new(x1.min(w), y1.min(l), h))
    };
    // Outer boundary.
    scene.obstacles.push(wall(0.0, 0.0, w, t));
    scene.obstacles.push(wall(0.0, l - t, w, l));
    scene.obstacles.push(wall(0.0, 0.0, t, l));
    scene.obstacles.push(wall(w - t, 0.0, w, l));
    for r in 0..rows {
        for c in 0..cols {
            let (cx0, cy0) = (c as f64 * MAZE_CELL, r as f64 * MAZE_CELL);
            if c + 1 < cols && !maze.is_open_east(c, r) {
                let xw = cx0 + MAZE_CELL;
                scene.obstacles.push(wall(xw - t, cy0 - t, xw + t, cy0 + MAZE_CELL + t));
            }
            if r + 1 < rows && !maze.is_open_north(c, r) {
                let yw = cy0 + MAZE_CELL;
                scene.obstacles.push(wall(cx0 - t, yw - t, cx0 + MAZE_CELL + t, yw + t));
            }
        }
    }
    Ok(scene)
}

/// Voxelised 3D noise thresholded to a fixed fill rate, with the start and
/// goal columns cleared.
pub fn gen_perlin(seed: u64, index: u32) -> Result<Scene, ScenegenError> {
    check_index(index)?;
    let family = Family::PerlinNoise;
    let mut rng = scene_rng(family, seed, index);
    let noise = PerlinNoise::new(&mut rng);
    let offset = Vec3::new(rng.random_range(0.0..256.0), rng.random_range(0.0..256.0), rng.random_range(0.0..256.0));
    let mut scene = Scene::empty(family, seed, index);
    let s = PERLIN_VOXEL;
    let nx = (scene.width() / s).round() as i32;
    let ny = (scene.length() / s).round() as i32;
    let nz = (scene.ceiling / s).round() as i32;
    let total = (nx * ny * nz) as usize;

    let cleared = |i: i32, j: i32| {
        let (x, y) = ((i as f64 + 0.5) * s, (j as f64 + 0.5) * s);
        [scene.start_position(), scene.goal].iter().any(|p| (p.x - x).hypot(p.y - y) < PERLIN_CLEAR_RADIUS)
    };

    let mut cells = Vec::new();
    let mut values = Vec::new();
    for i in 0..nx {
        for j in 0..ny {
            if cleared(i, j) {
                continue;
            }
            for k in 0..nz {
                let p = Vec3::new(i as f64 + 0.5, j as f64 + 0.5, k as f64 + 0.5) * (s * PERLIN_FREQUENCY) + offset;
                cells.push([i, j, k]);
                values.push(noise.sample(p.x, p.y, p.z));
            }
        }
    }
    let threshold = fill_threshold(&values, total, PERLIN_FILL, PERLIN_FILL_TOLERANCE)?;
    let occupied: Vec<[i32; 3]> =
        cells.into_iter().zip(values).filter(|(_, v)| *v > threshold).map(|(c, _)| c).collect();
    scene.obstacles.push(Obstacle::VoxelSet { voxel_size: s, cells: occupied });
    Ok(scene)
}

/// Occupied share of the scene's voxel lattice.
pub fn voxel_fill_fraction(scene: &Scene) -> f64 {
    let s = PERLIN_VOXEL;
    let total = (scene.width() / s).round() * (scene.length() / s).round() * (scene.ceiling / s).round();
    let occupied: usize = scene
        .obstacles
        .iter()
        .map(|o| match o {
            Obstacle::VoxelSet { cells, .. } => cells.len(),
            _ => 0,
        })
        .sum();
    occupied as f64 / total
}
