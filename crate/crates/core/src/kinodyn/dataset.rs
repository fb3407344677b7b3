use serde::{Deserialize, Serialize};

use super::{KinodynError, KinodynamicProfile};

const PLATFORMS_CSV: &str = include_str!("../../data/platforms.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Real,
    Virtual,
}

impl Category {
    pub fn as_str(&self) -> &'static str {
        match self {
            Category::Real => "real",
            Category::Virtual => "virtual",
        }
    }
}

impl std::str::FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "real" => Ok(Category::Real),
            "virtual" => Ok(Category::Virtual),
            other => Err(format!("unknown platform category `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlatformRecord {
    pub name: String,
    pub category: Category,
    pub profile: KinodynamicProfile,
    /// Informational only; profiles are stored, not recomputed.
    pub mass_kg: f64,
}

#[derive(Deserialize)]
struct Row {
    name: String,
    category: Category,
    mass_kg: f64,
    twr_max: f64,
    alpha_xy_max: f64,
    alpha_z_max: f64,
}

/// The 36 benchmark platforms (18 real, 18 virtual), in table order.
pub fn load_platform_dataset() -> Vec<PlatformRecord> {
    parse_platforms(PLATFORMS_CSV).expect("embedded platform table is valid")
}

pub(crate) fn parse_platforms(text: &str) -> Result<Vec<PlatformRecord>, KinodynError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut out: Vec<PlatformRecord> = Vec::new();
    for row in reader.deserialize::<Row>() {
        let row = row.map_err(|e| KinodynError::Dataset(e.to_string()))?;
        if out.iter().any(|p| p.name == row.name) {
            return Err(KinodynError::Dataset(format!("duplicate platform `{}`", row.name)));
        }
        out.push(PlatformRecord {
            profile: KinodynamicProfile::new(row.twr_max, row.alpha_xy_max, row.alpha_z_max)?,
            name: row.name,
            category: row.category,
            mass_kg: row.mass_kg,
        });
    }
    Ok(out)
}

pub fn platform_by_name(name: &str) -> Option<PlatformRecord> {
    load_platform_dataset().into_iter().find(|p| p.name == name)
}

/// Arithmetic means of the profile components over one category.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubsetMeans {
    pub count: usize,
    pub twr_max: f64,
    pub alpha_xy_max: f64,
    pub alpha_z_max: f64,
}

pub fn subset_means(records: &[PlatformRecord], category: Category) -> SubsetMeans {
    let subset: Vec<_> = records.iter().filter(|p| p.category == category).collect();
    let n = subset.len().max(1) as f64;
    SubsetMeans {
        count: subset.len(),
        twr_max: subset.iter().map(|p| p.profile.twr_max).sum::<f64>() / n,
        alpha_xy_max: subset.iter().map(|p| p.profile.alpha_xy_max).sum::<f64>() / n,
        alpha_z_max: subset.iter().map(|p| p.profile.alpha_z_max).sum::<f64>() / n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dataset_shape() {
        let all = load_platform_dataset();
        assert_eq!(all.len(), 36);
        assert_eq!(all.iter().filter(|p| p.category == Category::Real).count(), 18);
        let mut names: Vec<_> = all.iter().map(|p| p.name.as_str()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), 36);
    }

    #[test]
    fn table_lookups() {
        let emax = platform_by_name("0.60kg-EMAX").unwrap();
        assert_eq!(emax.category, Category::Real);
        assert_eq!((emax.profile.twr_max, emax.profile.alpha_xy_max, emax.profile.alpha_z_max), (2.2, 114.7, 8.4));
        let ego = platform_by_name("0.98kg-EGO Planner DIY").unwrap();
        assert_eq!(ego.category, Category::Virtual);
        assert_eq!((ego.profile.twr_max, ego.profile.alpha_xy_max, ego.profile.alpha_z_max), (4.6, 1083.3, 57.7));
        assert!(platform_by_name("nope").is_none());
    }

    #[test]
    fn real_mean_twr_rounds_to_published() {
        let m = subset_means(&load_platform_dataset(), Category::Real);
        assert!((m.twr_max - 2.30).abs() <= 0.05);
        // Raw mean of the table column.
        assert!((m.twr_max - 41.7 / 18.0).abs() < 1e-12);
    }

    #[test]
    fn duplicate_names_rejected() {
        let text = "name,category,mass_kg,twr_max,alpha_xy_max,alpha_z_max\na,real,1,2,3,4\na,virtual,1,2,3,4\n";
        assert!(matches!(parse_platforms(text), Err(KinodynError::Dataset(_))));
    }
}
