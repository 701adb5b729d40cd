//! Software twin of a small multi-vehicle testbed.
//!
//! The crate is organised the way the physical platform is wired:
//!
//! * [`vehicle`] - differential-drive kinematics and the RK4 integrator.
//! * [`world`] - the simulated arena and overhead tracker that stand in for
//!   the floor and the camera.
//! * [`netlink`] - pose telemetry (NDJSON, publisher/subscriber) and the
//!   5-byte thrust frames sent over a lossy one-way star link.
//! * [`pursuit`] - pure-pursuit path following with timestamp-driven
//!   synchronisation across vehicles.
//! * [`planners`] - hexagonal roadmap construction and exact min-max-distance
//!   multi-robot planning.
//! * [`rvo`] - ORCA half-planes, the 2D velocity LP, and resimulation of
//!   velocity profiles into timed paths.
//! * [`orchestrator`] - the closed control loop, the four demo scenarios,
//!   record/replay, and the live console session.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod math;
pub mod netlink;
pub mod orchestrator;
pub mod planners;
pub mod pursuit;
pub mod rvo;
pub mod vehicle;
pub mod world;

pub use math::Vec2;
pub use vehicle::{Pose2D, VehicleParams, WheelThrust};
