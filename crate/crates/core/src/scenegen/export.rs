use std::collections::HashSet;
use std::f64::consts::PI;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use super::{Scene, ScenegenError};
use crate::geometry::{Obstacle, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    /// PCD v0.7, ASCII body.
    Pcd,
    /// PLY 1.0, ASCII body.
    Ply,
    /// Scene manifest.
    Json,
}

impl ExportFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            ExportFormat::Pcd => "pcd",
            ExportFormat::Ply => "ply",
            ExportFormat::Json => "json",
        }
    }
}

impl std::str::FromStr for ExportFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "pcd" => Ok(ExportFormat::Pcd),
            "ply" => Ok(ExportFormat::Ply),
            "json" => Ok(ExportFormat::Json),
            other => Err(format!("unknown export format `{other}`")),
        }
    }
}

/// Points per unit length along a surface edge for a given areal density.
fn divisions(extent: f64, density: f64) -> usize {
    ((extent * density.sqrt()).round() as usize).max(1)
}

fn sample_rect(origin: Vec3, u: Vec3, v: Vec3, density: f64, out: &mut Vec<Vec3>) {
    let nu = divisions(u.norm(), density);
    let nv = divisions(v.norm(), density);
    for a in 0..nu {
        for b in 0..nv {
            let s = (a as f64 + 0.5) / nu as f64;
            let t = (b as f64 + 0.5) / nv as f64;
            out.push(origin + u * s + v * t);
        }
    }
}

fn sample_box(min: Vec3, max: Vec3, density: f64, out: &mut Vec<Vec3>) {
    let d = max - min;
    let (ex, ey, ez) = (Vec3::x() * d.x, Vec3::y() * d.y, Vec3::z() * d.z);
    sample_rect(min, ey, ez, density, out);
    sample_rect(min + ex, ey, ez, density, out);
    sample_rect(min, ex, ez, density, out);
    sample_rect(min + ey, ex, ez, density, out);
    sample_rect(min, ex, ey, density, out);
    sample_rect(min + ez, ex, ey, density, out);
}

fn sample_cylinder(base: Vec3, axis: Vec3, radius: f64, length: f64, density: f64, out: &mut Vec<Vec3>) {
    let helper = if axis.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let e1 = axis.cross(&helper).normalize();
    let e2 = axis.cross(&e1);
    let around = divisions(2.0 * PI * radius, density).max(3);
    let along = divisions(length, density);
    for a in 0..around {
        let theta = 2.0 * PI * (a as f64 + 0.5) / around as f64;
        let radial = e1 * theta.cos() + e2 * theta.sin();
        for b in 0..along {
            let h = length * (b as f64 + 0.5) / along as f64;
            out.push(base + axis * h + radial * radius);
        }
    }
    let rings = divisions(radius, density);
    for cap in [base, base + axis * length] {
        for ring in 0..rings {
            let r = radius * (ring as f64 + 0.5) / rings as f64;
            let n = divisions(2.0 * PI * r, density).max(3);
            for a in 0..n {
                let theta = 2.0 * PI * (a as f64 + 0.5) / n as f64;
                out.push(cap + (e1 * theta.cos() + e2 * theta.sin()) * r);
            }
        }
    }
}

fn sample_voxels(size: f64, cells: &[[i32; 3]], density: f64, out: &mut Vec<Vec3>) {
    let occupied: HashSet<[i32; 3]> = cells.iter().copied().collect();
    let faces: [([i32; 3], Vec3, Vec3, Vec3); 6] = [
        ([-1, 0, 0], Vec3::zeros(), Vec3::y(), Vec3::z()),
        ([1, 0, 0], Vec3::x(), Vec3::y(), Vec3::z()),
        ([0, -1, 0], Vec3::zeros(), Vec3::x(), Vec3::z()),
        ([0, 1, 0], Vec3::y(), Vec3::x(), Vec3::z()),
        ([0, 0, -1], Vec3::zeros(), Vec3::x(), Vec3::y()),
        ([0, 0, 1], Vec3::z(), Vec3::x(), Vec3::y()),
    ];
    for c in cells {
        let corner = Vec3::new(c[0] as f64, c[1] as f64, c[2] as f64) * size;
        for (n, offset, u, v) in &faces {
            if occupied.contains(&[c[0] + n[0], c[1] + n[1], c[2] + n[2]]) {
                continue;
            }
            sample_rect(corner + offset * size, u * size, v * size, density, out);
        }
    }
}

/// Deterministic stratified samples over every exposed obstacle surface, at
/// roughly `density` points per square metre.
pub fn sample_surface(scene: &Scene, density: f64) -> Result<Vec<Vec3>, ScenegenError> {
    if !(density > 0.0 && density.is_finite()) {
        return Err(ScenegenError::InvalidDensity(density));
    }
    let mut out = Vec::new();
    for o in &scene.obstacles {
        match o {
            Obstacle::Box { min, max } => sample_box(*min, *max, density, &mut out),
            Obstacle::Cylinder { base, axis, radius, length } => {
                sample_cylinder(*base, *axis, *radius, *length, density, &mut out)
            }
            Obstacle::VoxelSet { voxel_size, cells } => sample_voxels(*voxel_size, cells, density, &mut out),
        }
    }
    Ok(out)
}

/// `%g`-style rendering of a 4-byte float with 6 significant digits.
pub fn format_g6(value: f64) -> String {
    let v = value as f32;
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{:.5e}", v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (5 - exp) as usize;
        trim_zeros(&format!("{:.*}", decimals, v)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn write_points<W: Write>(points: &[Vec3], out: &mut W) -> io::Result<()> {
    for p in points {
        writeln!(out, "{} {} {}", format_g6(p.x), format_g6(p.y), format_g6(p.z))?;
    }
    Ok(())
}

/// Serialise a scene in the requested format. `density` is ignored for JSON.
pub fn write_scene<W: Write>(scene: &Scene, format: ExportFormat, density: f64, out: &mut W) -> Result<(), ScenegenError> {
    match format {
        ExportFormat::Json => {
            out.write_all(scene.to_manifest_json()?.as_bytes())?;
            out.write_all(b"\n")?;
        }
        ExportFormat::Pcd => {
            let points = sample_surface(scene, density)?;
            let n = points.len();
            write!(
                out,
                "# .PCD v0.7 - Point Cloud Data file format\nVERSION 0.7\nFIELDS x y z\nSIZE 4 4 4\nTYPE F F F\nCOUNT 1 1 1\n\
                 WIDTH {n}\nHEIGHT 1\nVIEWPOINT 0 0 0 1 0 0 0\nPOINTS {n}\nDATA ascii\n"
            )?;
            write_points(&points, out)?;
        }
        ExportFormat::Ply => {
            let points = sample_surface(scene, density)?;
            write!(
                out,
                "ply\nformat ascii 1.0\nelement vertex {}\nproperty float x\nproperty float y\nproperty float z\nend_header\n",
                points.len()
            )?;
            write_points(&points, out)?;
        }
    }
    Ok(())
}

/// Write `<dir>/<stem>.<ext>` and return its path.
pub fn export_scene(scene: &Scene, format: ExportFormat, density: f64, dir: &Path) -> Result<PathBuf, ScenegenError> {
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("{}.{}", scene.file_stem(), format.extension()));
    let mut buf = Vec::new();
    write_scene(scene, format, density, &mut buf)?;
    fs::write(&path, buf)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenegen::Family;

    #[test]
    fn g6_formatting() {
        assert_eq!(format_g6(0.0), "0");
        assert_eq!(format_g6(1.5), "1.5");
        assert_eq!(format_g6(20.0), "20");
        assert_eq!(format_g6(12.345678), "12.3457");
        assert_eq!(format_g6(-0.25), "-0.25");
        assert_eq!(format_g6(1234567.0), "1.23457e+06");
        assert_eq!(format_g6(0.00001), "1e-05");
        assert_eq!(format_g6(999999.6), "1e+06");
    }

    #[test]
    fn empty_scene_has_header_and_no_points() {
        let scene = Scene::empty(Family::Forest, 0, 1);
        let mut buf = Vec::new();
        write_scene(&scene, ExportFormat::Pcd, 10.0, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("POINTS 0\nDATA ascii\n"));
        assert!(text.ends_with("DATA ascii\n"));
        let mut buf = Vec::new();
        write_scene(&scene, ExportFormat::Ply, 10.0, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().contains("element vertex 0\n"));
    }

    #[test]
    fn unit_box_point_count() {
        let mut scene = Scene::empty(Family::Forest, 0, 1);
        scene.obstacles.push(Obstacle::aabb_box(Vec3::new(5.0, 5.0, 0.0), Vec3::new(6.0, 6.0, 1.0)));
        let n = sample_surface(&scene, 100.0).unwrap().len() as f64;
        assert!((n - 600.0).abs() <= 30.0, "{n}");
    }

    #[test]
    fn cylinder_samples_lie_on_surface() {
        let mut scene = Scene::empty(Family::Forest, 0, 1);
        let o = Obstacle::cylinder(Vec3::new(3.0, 4.0, 0.5), Vec3::new(1.0, 0.0, 1.0), 0.4, 2.0);
        scene.obstacles.push(o.clone());
        for p in sample_surface(&scene, 50.0).unwrap() {
            assert!(o.signed_distance(&p).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_non_positive_density() {
        let scene = Scene::empty(Family::Forest, 0, 1);
        assert!(matches!(sample_surface(&scene, 0.0), Err(ScenegenError::InvalidDensity(_))));
    }
}
