//! Wire interfaces: pose telemetry and thrust commands.
//!
//! Telemetry is one NDJSON line per camera frame, published through a
//! latest-value bus. Thrust commands are 5-byte frames
//! `[0xA5, id, left, right, xor]` carried over a one-way lossy link; the API
//! deliberately has no path from vehicles back to the controller.

mod bus;
mod console;
mod link;
mod pose;
mod thrust;
pub mod transport;

pub use bus::{pose_bus, PosePublisher, PoseSubscriber};
pub use console::{Ack, CommandKind, ConsoleCommand, PathPoint};
pub use link::{lossy_send, LinkConfig, LossyLink};
pub use pose::{decode_pose_frame, encode_pose_frame, PoseFrame, TagPose};
pub use thrust::{decode_thrust_frame, encode_thrust_frame, scan_thrust_frame, ThrustDecoder, ThrustFrame, THRUST_FRAME_LEN, THRUST_HEADER};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetError {
    #[error("{field}: {reason}")]
    Parse { field: String, reason: String },
    #[error("duplicate id {0}")]
    DuplicateId(u32),
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("checksum mismatch (expected {expected:#04x}, got {got:#04x})")]
    Checksum { expected: u8, got: u8 },
    #[error("range: percent {0} outside -100..=100")]
    Range(i8),
    #[error("incomplete frame: need {need} bytes, have {have}")]
    Incomplete { need: usize, have: usize },
    #[error("no data yet")]
    NoData,
    #[error("timestamp went backwards: {prev} then {next}")]
    NonMonotone { prev: f64, next: f64 },
    #[error("invalid link config: {0}")]
    InvalidConfig(&'static str),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for NetError {
    fn from(e: std::io::Error) -> Self {
        NetError::Io(e.to_string())
    }
}
