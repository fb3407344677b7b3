//! Quadrotor kinodynamic capability model.
//!
//! A platform is reduced to three numbers: the maximum thrust-to-weight ratio,
//! the maximum horizontal (roll) angular acceleration and the maximum yaw
//! angular acceleration. They are derived from rotor and rigid-body parameters
//! with rotor thrust `c_T·ω²`, rotor reaction torque `c_M·ω²`, and a diagonal
//! inertia tensor.

mod dataset;

pub use dataset::{load_platform_dataset, platform_by_name, subset_means, Category, PlatformRecord, SubsetMeans};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Standard gravity, m/s².
pub const STANDARD_GRAVITY: f64 = 9.80665;

#[derive(Debug, Error, PartialEq)]
pub enum KinodynError {
    #[error("invalid parameter `{name}` = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("rotor {rotor} speed {omega} rad/s outside [{min}, {max}]")]
    SpeedOutOfBounds { rotor: usize, omega: f64, min: f64, max: f64 },
    #[error("platform dataset: {0}")]
    Dataset(String),
}

/// Motor-arm orientation relative to the body axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    /// Arms on the body x and y axes.
    Plus,
    /// Arms rotated by 45°.
    Cross,
}

/// Rotor parameters. Speeds are per rotor, in rad/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotorSet {
    layout: Layout,
    thrust_coeff: f64,
    torque_coeff: f64,
    arm_length: f64,
    omega_max: [f64; 4],
    omega_min: [f64; 4],
}

fn positive(name: &'static str, value: f64) -> Result<f64, KinodynError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(KinodynError::InvalidParameter { name, value })
    }
}

impl RotorSet {
    /// Rotor set with a zero idle floor on every rotor.
    pub fn new(
        layout: Layout,
        thrust_coeff: f64,
        torque_coeff: f64,
        arm_length: f64,
        omega_max: [f64; 4],
    ) -> Result<Self, KinodynError> {
        Self::with_idle(layout, thrust_coeff, torque_coeff, arm_length, omega_max, [0.0; 4])
    }

    pub fn with_idle(
        layout: Layout,
        thrust_coeff: f64,
        torque_coeff: f64,
        arm_length: f64,
        omega_max: [f64; 4],
        omega_min: [f64; 4],
    ) -> Result<Self, KinodynError> {
        positive("c_T", thrust_coeff)?;
        positive("c_M", torque_coeff)?;
        positive("arm_length", arm_length)?;
        for i in 0..4 {
            if !(omega_min[i] >= 0.0 && omega_min[i].is_finite()) {
                return Err(KinodynError::InvalidParameter { name: "omega_min", value: omega_min[i] });
            }
            if !(omega_max[i] > omega_min[i] && omega_max[i].is_finite()) {
                return Err(KinodynError::InvalidParameter { name: "omega_max", value: omega_max[i] });
            }
        }
        Ok(RotorSet { layout, thrust_coeff, torque_coeff, arm_length, omega_max, omega_min })
    }

    /// Rotor set whose arm length and torque coefficient may be zero. Only
    /// useful for degenerate limit cases such as a torque-free hover rig.
    pub fn degenerate(layout: Layout, thrust_coeff: f64, omega_max: [f64; 4]) -> Result<Self, KinodynError> {
        positive("c_T", thrust_coeff)?;
        for w in omega_max {
            positive("omega_max", w)?;
        }
        Ok(RotorSet { layout, thrust_coeff, torque_coeff: 0.0, arm_length: 0.0, omega_max, omega_min: [0.0; 4] })
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }
    pub fn thrust_coeff(&self) -> f64 {
        self.thrust_coeff
    }
    pub fn torque_coeff(&self) -> f64 {
        self.torque_coeff
    }
    pub fn arm_length(&self) -> f64 {
        self.arm_length
    }
    pub fn omega_max(&self) -> [f64; 4] {
        self.omega_max
    }
    pub fn omega_min(&self) -> [f64; 4] {
        self.omega_min
    }

    /// Per-axis coefficients of `ω_i²` in the body torque, rows (x, y, z).
    fn torque_coefficients(&self) -> [[f64; 4]; 3] {
        let arm = self.arm_length * self.thrust_coeff;
        let yaw = self.torque_coeff;
        match self.layout {
            Layout::Plus => [
                [0.0, -arm, 0.0, arm],
                [arm, 0.0, -arm, 0.0],
                [yaw, -yaw, yaw, -yaw],
            ],
            Layout::Cross => {
                let h = arm * std::f64::consts::FRAC_1_SQRT_2;
                [[h, -h, -h, h], [h, h, -h, -h], [yaw, -yaw, yaw, -yaw]]
            }
        }
    }

    /// Body torque produced by the given rotor speeds.
    pub fn torque(&self, omegas: [f64; 4]) -> Result<[f64; 3], KinodynError> {
        self.check_speeds(&omegas)?;
        let c = self.torque_coefficients();
        Ok(c.map(|row| (0..4).map(|i| row[i] * omegas[i] * omegas[i]).sum()))
    }

    fn check_speeds(&self, omegas: &[f64; 4]) -> Result<(), KinodynError> {
        for (i, &w) in omegas.iter().enumerate() {
            if !(w >= self.omega_min[i] && w <= self.omega_max[i]) {
                return Err(KinodynError::SpeedOutOfBounds {
                    rotor: i + 1,
                    omega: w,
                    min: self.omega_min[i],
                    max: self.omega_max[i],
                });
            }
        }
        Ok(())
    }
}

/// Mass and principal moments of inertia (off-diagonal terms are zero).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidBody {
    mass: f64,
    inertia: [f64; 3],
}

impl RigidBody {
    pub fn new(mass: f64, inertia: [f64; 3]) -> Result<Self, KinodynError> {
        positive("mass", mass)?;
        positive("J_xx", inertia[0])?;
        positive("J_yy", inertia[1])?;
        positive("J_zz", inertia[2])?;
        Ok(RigidBody { mass, inertia })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn inertia(&self) -> [f64; 3] {
        self.inertia
    }
}

/// Compact capability vector `(TWR_max, α_xy_max, α_z_max)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinodynamicProfile {
    pub twr_max: f64,
    /// rad/s²
    pub alpha_xy_max: f64,
    /// rad/s²
    pub alpha_z_max: f64,
}

impl KinodynamicProfile {
    pub fn new(twr_max: f64, alpha_xy_max: f64, alpha_z_max: f64) -> Result<Self, KinodynError> {
        positive("twr_max", twr_max)?;
        positive("alpha_xy_max", alpha_xy_max)?;
        positive("alpha_z_max", alpha_z_max)?;
        Ok(KinodynamicProfile { twr_max, alpha_xy_max, alpha_z_max })
    }
}

/// Total rotor thrust `c_T·Σω_i²` in newtons.
pub fn total_thrust(rotors: &RotorSet, omegas: [f64; 4]) -> Result<f64, KinodynError> {
    rotors.check_speeds(&omegas)?;
    Ok(rotors.thrust_coeff * omegas.iter().map(|w| w * w).sum::<f64>())
}

/// Maximum thrust-to-weight ratio with every rotor at its sustained maximum.
pub fn twr_max(rotors: &RotorSet, body: &RigidBody, gravity: f64) -> Result<f64, KinodynError> {
    positive("g", gravity)?;
    let thrust = rotors.thrust_coeff * rotors.omega_max.iter().map(|w| w * w).sum::<f64>();
    Ok(thrust / (body.mass * gravity))
}

/// Largest torque magnitude reachable on each body axis with rotor speeds
/// chosen independently inside `[omega_min, omega_max]`.
///
/// No total-thrust constraint is imposed, so this is an optimistic envelope.
pub fn torque_max(rotors: &RotorSet) -> [f64; 3] {
    let coeffs = rotors.torque_coefficients();
    coeffs.map(|row| {
        let mut sup = 0.0;
        let mut inf = 0.0;
        for ((&k, w_hi), w_lo) in row.iter().zip(rotors.omega_max).zip(rotors.omega_min) {
            let (hi, lo) = (w_hi * w_hi, w_lo * w_lo);
            if k >= 0.0 {
                sup += k * hi;
                inf += k * lo;
            } else {
                sup += k * lo;
                inf += k * hi;
            }
        }
        sup.max(-inf).max(0.0)
    })
}

/// Component-wise `τ / J` with the diagonal inertia.
pub fn alpha_max(torques: [f64; 3], body: &RigidBody) -> [f64; 3] {
    [torques[0] / body.inertia[0], torques[1] / body.inertia[1], torques[2] / body.inertia[2]]
}

/// Full capability vector. The horizontal term uses the roll axis.
pub fn performance_vector(rotors: &RotorSet, body: &RigidBody) -> Result<KinodynamicProfile, KinodynError> {
    performance_vector_with_gravity(rotors, body, STANDARD_GRAVITY)
}

pub fn performance_vector_with_gravity(
    rotors: &RotorSet,
    body: &RigidBody,
    gravity: f64,
) -> Result<KinodynamicProfile, KinodynError> {
    let twr = twr_max(rotors, body, gravity)?;
    let alpha = alpha_max(torque_max(rotors), body);
    // Not routed through `KinodynamicProfile::new`: degenerate rigs may have
    // zero torque authority.
    Ok(KinodynamicProfile { twr_max: twr, alpha_xy_max: alpha[0], alpha_z_max: alpha[2] })
}

/// Synthesize a virtual platform by scaling mass, arm length and maximum rotor
/// speed. Inertia follows rigid-body similarity, `J ∝ m·d²`.
pub fn scale_platform(
    rotors: &RotorSet,
    body: &RigidBody,
    mass_factor: f64,
    arm_factor: f64,
    omega_factor: f64,
) -> Result<(RotorSet, RigidBody), KinodynError> {
    positive("mass_factor", mass_factor)?;
    positive("arm_factor", arm_factor)?;
    positive("omega_factor", omega_factor)?;
    let inertia_factor = mass_factor * arm_factor * arm_factor;
    let scaled_rotors = RotorSet {
        arm_length: rotors.arm_length * arm_factor,
        omega_max: rotors.omega_max.map(|w| w * omega_factor),
        omega_min: rotors.omega_min.map(|w| w * omega_factor),
        ..rotors.clone()
    };
    let scaled_body = RigidBody::new(body.mass * mass_factor, body.inertia.map(|j| j * inertia_factor))?;
    Ok((scaled_rotors, scaled_body))
}
