//! Quadrotor navigation benchmark.
//!
//! The crate is organised as a pipeline:
//!
//! * [`kinodyn`]: platform capability vectors (thrust-to-weight ratio, roll and
//!   yaw angular-acceleration envelopes) and the embedded 36-platform dataset.
//! * [`scenegen`]: seven procedural scenario families, solvability checks and
//!   point-cloud / manifest export.
//! * [`sim`]: a capability-limited point-mass vehicle, the planner interface,
//!   and single-trial execution.
//! * [`eval`]: the algorithm × scenario × platform trial matrix, bootstrap
//!   confidence intervals and summary tables.
//! * [`scoring`]: weighted composite scoring with a variance penalty.

pub mod eval;
pub mod geometry;
pub mod kinodyn;
pub mod scenegen;
pub mod scoring;
pub mod seed;
pub mod sim;

pub use geometry::Vec3;
