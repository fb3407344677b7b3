//! Browser bindings: a capability calculator, scene generation and a single
//! trial flight. Every export returns a JSON string; errors become JS
//! exceptions carrying the message.

use quadbench::geometry::Obstacle;
use quadbench::kinodyn::{load_platform_dataset, performance_vector, platform_by_name, Layout, RigidBody, RotorSet};
use quadbench::scenegen::{validate_scene, voxel_fill_fraction, Family, Scene, Solvability};
use quadbench::sim::{
    greedy_reference_planner, run_trial, straight_flight_planner, Planner, ReferenceParams, TaskSpec,
};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn fail(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

/// Names and categories of the 36 platforms.
#[wasm_bindgen]
pub fn platforms() -> String {
    let rows: Vec<Value> = load_platform_dataset()
        .iter()
        .map(|p| {
            json!({
                "name": p.name,
                "category": p.category.as_str(),
                "twr_max": p.profile.twr_max,
                "alpha_xy_max": p.profile.alpha_xy_max,
                "alpha_z_max": p.profile.alpha_z_max,
            })
        })
        .collect();
    Value::Array(rows).to_string()
}

/// Capability vector of a rotor rig: `layout` is "plus" or "cross", speeds in rad/s.
#[allow(clippy::too_many_arguments)]
#[wasm_bindgen]
pub fn profile(
    layout: &str,
    mass: f64,
    ixx: f64,
    iyy: f64,
    izz: f64,
    thrust_coeff: f64,
    torque_coeff: f64,
    arm_length: f64,
    omega_max: f64,
) -> Result<String, JsError> {
    let layout = match layout {
        "plus" => Layout::Plus,
        "cross" => Layout::Cross,
        other => return Err(fail(format!("unknown layout `{other}`"))),
    };
    let rotors = RotorSet::new(layout, thrust_coeff, torque_coeff, arm_length, [omega_max; 4]).map_err(fail)?;
    let body = RigidBody::new(mass, [ixx, iyy, izz]).map_err(fail)?;
    let p = performance_vector(&rotors, &body).map_err(fail)?;
    Ok(json!({ "twr_max": p.twr_max, "alpha_xy_max": p.alpha_xy_max, "alpha_z_max": p.alpha_z_max }).to_string())
}

fn scene(family: &str, seed: u64, index: u32) -> Result<Scene, JsError> {
    let family: Family = family.parse().map_err(fail)?;
    family.generate(seed, index).map_err(fail)
}

/// Top-down footprint of an obstacle for drawing: circles, rectangles or voxel squares.
fn footprint(o: &Obstacle) -> Value {
    match o {
        Obstacle::Cylinder { base, axis, radius, length } => {
            let top = base + axis * *length;
            json!({ "type": "cylinder", "x0": base.x, "y0": base.y, "x1": top.x, "y1": top.y, "r": radius })
        }
        Obstacle::Box { min, max } => {
            json!({ "type": "box", "x0": min.x, "y0": min.y, "x1": max.x, "y1": max.y, "z0": min.z, "z1": max.z })
        }
        Obstacle::VoxelSet { voxel_size, cells } => {
            // Columns only; the page draws each occupied (i, j) once.
            let mut columns: Vec<[i64; 2]> = cells.iter().map(|c| [c[0] as i64, c[1] as i64]).collect();
            columns.sort_unstable();
            columns.dedup();
            json!({ "type": "voxels", "size": voxel_size, "columns": columns })
        }
    }
}

fn scene_json(s: &Scene) -> Value {
    let verdict = match validate_scene(s, TaskSpec::default().vehicle_radius) {
        Solvability::Solvable { path_length } => json!({ "solvable": true, "path_length": path_length }),
        Solvability::Unsolvable => json!({ "solvable": false }),
    };
    let start = s.start_position();
    let fill = (s.family == Family::PerlinNoise).then(|| voxel_fill_fraction(s));
    json!({
        "family": s.family.as_str(),
        "class": s.family.class().as_str(),
        "seed": s.seed,
        "index": s.index,
        "width": s.width(),
        "length": s.length(),
        "ceiling": s.ceiling,
        "start": [start.x, start.y, start.z],
        "goal": [s.goal.x, s.goal.y, s.goal.z],
        "obstacle_count": s.obstacles.len(),
        "obstacles": s.obstacles.iter().map(footprint).collect::<Vec<_>>(),
        "validation": verdict,
        "fill_fraction": fill,
    })
}

/// Generate one scene and return its top-down layout with the solvability verdict.
#[wasm_bindgen]
pub fn generate(family: &str, seed: u64, index: u32) -> Result<String, JsError> {
    Ok(scene_json(&scene(family, seed, index)?).to_string())
}

/// Fly one trial; `planner` is "straight" or "reference".
#[wasm_bindgen]
pub fn fly(family: &str, seed: u64, index: u32, platform: &str, planner: &str) -> Result<String, JsError> {
    let s = scene(family, seed, index)?;
    let record = platform_by_name(platform).ok_or_else(|| fail(format!("no platform named `{platform}`")))?;
    let mut p: Box<dyn Planner> = match planner {
        "straight" => Box::new(straight_flight_planner()),
        "reference" => Box::new(greedy_reference_planner(ReferenceParams::default())),
        other => return Err(fail(format!("unknown planner `{other}`"))),
    };
    let r = run_trial(p.as_mut(), &s, &record.profile, &TaskSpec::default(), seed).map_err(fail)?;
    let path: Vec<[f64; 3]> = r.path.iter().map(|v| [v.x, v.y, v.z]).collect();
    Ok(json!({
        "scene": scene_json(&s),
        "outcome": format!("{:?}", r.outcome),
        "elapsed": r.elapsed,
        "min_clearance": r.min_clearance,
        "diagnostic": r.diagnostic,
        "path": path,
    })
    .to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Value {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn hover_rig_profile() {
        let v = parse(&profile("cross", 1.0, 0.01, 0.01, 0.02, 1e-5, 1e-7, 0.2, 1000.0).unwrap());
        // Four rotors at 1e-5·1000² = 10 N each.
        assert!((v["twr_max"].as_f64().unwrap() - 40.0 / 9.80665).abs() < 1e-9);
    }

    #[test]
    fn generated_scene_is_described() {
        let v = parse(&generate("forest", 1, 1).unwrap());
        assert_eq!(v["obstacle_count"], 48);
        assert_eq!(v["validation"]["solvable"], true);
        assert_eq!(v["obstacles"].as_array().unwrap().len(), 48);
    }

    #[test]
    fn flight_is_deterministic() {
        let a = fly("forest", 2, 1, "0.60kg-EMAX", "reference").unwrap();
        assert_eq!(a, fly("forest", 2, 1, "0.60kg-EMAX", "reference").unwrap());
        assert!(!parse(&a)["path"].as_array().unwrap().is_empty());
    }

    #[test]
    fn platforms_lists_all() {
        assert_eq!(parse(&platforms()).as_array().unwrap().len(), 36);
    }
}
