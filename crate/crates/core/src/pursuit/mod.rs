//! Pure-pursuit path following with schedule synchronisation.
//!
//! Each control tick the follower
//!
//! 1. projects the vehicle onto its path (never behind its recorded progress),
//! 2. picks the first path point a fixed lookahead distance away,
//! 3. computes the curvature of the circle through the vehicle and that point
//!    tangent to the current heading,
//! 4. scales the top wheel thrust by how far the vehicle is behind or ahead
//!    of the path's timestamps, and
//! 5. converts curvature and thrust budget into left/right wheel commands.
//!
//! Nominal thrust stays at a fraction of the maximum (0.7 by default) so that
//! lagging vehicles have headroom to catch up.

mod path;

pub use path::{Projection, TimedPath, Waypoint, MIN_SEGMENT};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::math::Vec2;
use crate::vehicle::{Pose2D, VehicleParams, WheelThrust};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PursuitError {
    #[error("path needs at least 2 waypoints, got {0}")]
    TooFewWaypoints(usize),
    #[error("waypoint {0} is not finite")]
    NonFinite(usize),
    #[error("timestamp of waypoint {0} does not increase")]
    NonMonotoneTime(usize),
    #[error("waypoint {0} duplicates its predecessor")]
    DuplicatePoint(usize),
    #[error("path is empty")]
    EmptyPath,
    #[error("segment index {index} out of range for {segments} segments")]
    InvalidIndex { index: usize, segments: usize },
    #[error("target coincides with the vehicle position")]
    TargetAtVehicle,
    #[error("invalid pursuit configuration: {0}")]
    InvalidConfig(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PursuitConfig {
    /// Lookahead distance, meters.
    pub lookahead: f64,
    /// Upper bound on the faster wheel at nominal speed (fraction of max).
    pub cap_fraction: f64,
    /// Faster-wheel thrust when exactly on schedule.
    pub base_thrust: f64,
    /// Proportional gain on arclength schedule error, 1/m.
    pub sync_gain: f64,
    /// Distance to the final waypoint that counts as arrived, meters.
    pub goal_tolerance: f64,
}

impl Default for PursuitConfig {
    fn default() -> Self {
        Self {
            lookahead: 0.12,
            cap_fraction: 0.7,
            base_thrust: 0.7,
            sync_gain: 10.0,
            goal_tolerance: 0.03,
        }
    }
}

impl PursuitConfig {
    pub fn validate(&self) -> Result<(), PursuitError> {
        if !(self.lookahead.is_finite() && self.lookahead > 0.0) {
            return Err(PursuitError::InvalidConfig("lookahead must be > 0"));
        }
        if !(self.cap_fraction > 0.0 && self.cap_fraction <= 1.0) {
            return Err(PursuitError::InvalidConfig("cap_fraction must be in (0, 1]"));
        }
        if !(self.base_thrust > 0.0 && self.base_thrust <= self.cap_fraction) {
            return Err(PursuitError::InvalidConfig("base_thrust must be in (0, cap_fraction]"));
        }
        if !(self.sync_gain.is_finite() && self.sync_gain >= 0.0) {
            return Err(PursuitError::InvalidConfig("sync_gain must be >= 0"));
        }
        if !(self.goal_tolerance.is_finite() && self.goal_tolerance > 0.0) {
            return Err(PursuitError::InvalidConfig("goal_tolerance must be > 0"));
        }
        Ok(())
    }

    /// Largest accepted `speed_scale`.
    pub fn max_speed_scale(&self) -> f64 {
        1.0 / self.cap_fraction
    }

    /// Arclength window searched when re-projecting onto the path.
    fn projection_window(&self) -> f64 {
        2.0 * self.lookahead
    }
}

/// Finds the pursuit target: the first point along the path, at or after the
/// vehicle's projection onto segments `>= from_index`, whose distance from the
/// vehicle equals `ell`. Falls back to the final waypoint when no such point
/// exists ahead. The returned segment index is never below `from_index`.
pub fn lookahead_point(path: &TimedPath, pose: &Pose2D, ell: f64, from_index: usize) -> Result<(Vec2, usize), PursuitError> {
    if path.is_empty() {
        return Err(PursuitError::EmptyPath);
    }
    if !(ell.is_finite() && ell > 0.0) {
        return Err(PursuitError::InvalidConfig("lookahead must be > 0"));
    }
    if from_index >= path.segment_count() {
        return Err(PursuitError::InvalidIndex {
            index: from_index,
            segments: path.segment_count(),
        });
    }
    let center = pose.position();
    let proj = path.project_windowed(center, from_index, 2.0 * ell);
    Ok(circle_crossing(path, center, ell, proj.segment, proj.u)
        .unwrap_or((path.final_point(), path.segment_count() - 1)))
}

fn circle_crossing(path: &TimedPath, center: Vec2, ell: f64, start: usize, start_u: f64) -> Option<(Vec2, usize)> {
    for j in start..path.segment_count() {
        let a = path.point(j);
        let d = path.point(j + 1) - a;
        let qa = d.norm_sq();
        if qa < MIN_SEGMENT * MIN_SEGMENT {
            continue;
        }
        let f = a - center;
        let qb = 2.0 * f.dot(d);
        let qc = f.norm_sq() - ell * ell;
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            continue;
        }
        let root = disc.sqrt();
        let u_min = if j == start { start_u } else { 0.0 };
        let roots = [(-qb - root) / (2.0 * qa), (-qb + root) / (2.0 * qa)];
        if let Some(u) = roots.into_iter().find(|u| *u >= u_min && *u <= 1.0) {
            return Some((a + d * u, j));
        }
    }
    None
}

/// Curvature of the circle through the vehicle and `target` that is tangent
/// to the vehicle's heading. Positive turns left.
///
/// A target exactly behind the vehicle gets the left-turning circle of
/// diameter equal to the distance.
pub fn pursuit_curvature(pose: &Pose2D, target: Vec2) -> Result<f64, PursuitError> {
    let local = pose.to_local(target);
    let d_sq = local.norm_sq();
    if d_sq.sqrt() < 1e-9 {
        return Err(PursuitError::TargetAtVehicle);
    }
    if local.x < 0.0 && local.y.abs() <= 1e-12 * d_sq.sqrt() {
        return Ok(2.0 / d_sq.sqrt());
    }
    Ok(2.0 * local.y / d_sq)
}

/// Wheel thrusts realising curvature `kappa`. The faster wheel runs at
/// `min(1, cap_fraction * speed_scale)`; the slower one follows from the
/// differential-drive ratio `u_r / u_l = (2 + kL) / (2 - kL)`, reversing
/// once `|kL| > 2`.
pub fn curvature_to_thrust(kappa: f64, speed_scale: f64, cfg: &PursuitConfig, params: &VehicleParams) -> WheelThrust {
    let scale = speed_scale.clamp(0.0, cfg.max_speed_scale());
    let fast = (cfg.cap_fraction * scale).min(1.0);
    let kl = kappa * params.axle_length;
    if kl >= 0.0 {
        WheelThrust::clamped(fast * (2.0 - kl) / (2.0 + kl), fast)
    } else {
        WheelThrust::clamped(fast, fast * (2.0 + kl) / (2.0 - kl))
    }
}

/// Speed multiplier from arclength schedule error `s_sched - s_actual`.
pub fn sync_scale_at(path: &TimedPath, arclength: f64, now: f64, cfg: &PursuitConfig) -> f64 {
    let lag = path.scheduled_arclength(now) - arclength;
    (1.0 + cfg.sync_gain * lag).clamp(0.0, cfg.max_speed_scale())
}

/// Speeds up vehicles behind their timestamps and slows those ahead.
/// Uses the vehicle's projection over the whole path.
pub fn sync_scale(path: &TimedPath, pose: &Pose2D, now: f64, cfg: &PursuitConfig) -> f64 {
    sync_scale_at(path, path.project(pose.position()).arclength, now, cfg)
}

/// Per-vehicle follower state threaded through [`follow_step`].
#[derive(Debug, Clone, PartialEq)]
pub struct FollowState {
    pub path: TimedPath,
    /// Segment holding the vehicle's last projection; never decreases.
    pub progress_index: usize,
    pub done: bool,
}

impl FollowState {
    pub fn new(path: TimedPath) -> Self {
        Self {
            path,
            progress_index: 0,
            done: false,
        }
    }

    /// Vehicle projection that respects recorded progress.
    pub fn projection(&self, pose: &Pose2D, cfg: &PursuitConfig) -> Projection {
        self.path
            .project_windowed(pose.position(), self.progress_index, cfg.projection_window())
    }

    /// Scheduled minus actual arclength for a vehicle at `pose`.
    pub fn schedule_error(&self, pose: &Pose2D, now: f64, cfg: &PursuitConfig) -> f64 {
        self.path.scheduled_arclength(now) - self.projection(pose, cfg).arclength
    }
}

/// One control tick. Returns zero thrust and marks the state done once the
/// vehicle is within `goal_tolerance` of the final waypoint with nothing left
/// to chase; a finished state keeps returning zero thrust.
pub fn follow_step(
    state: &mut FollowState,
    pose: &Pose2D,
    now: f64,
    cfg: &PursuitConfig,
    params: &VehicleParams,
) -> Result<WheelThrust, PursuitError> {
    if state.done {
        return Ok(WheelThrust::ZERO);
    }
    let proj = state.projection(pose, cfg);
    state.progress_index = state.progress_index.max(proj.segment);

    let center = pose.position();
    let ahead = circle_crossing(&state.path, center, cfg.lookahead, proj.segment, proj.u);
    let to_goal = center.distance(state.path.final_point());
    if ahead.is_none() && to_goal <= cfg.goal_tolerance {
        state.done = true;
        return Ok(WheelThrust::ZERO);
    }
    let target = ahead.map_or(state.path.final_point(), |(p, _)| p);
    let kappa = pursuit_curvature(pose, target)?;
    let scale = sync_scale_at(&state.path, proj.arclength, now, cfg) * cfg.base_thrust / cfg.cap_fraction;
    Ok(curvature_to_thrust(kappa, scale, cfg, params))
}
