//! Reciprocal velocity obstacles in the ORCA half-plane formulation.
//!
//! Each pair of agents shares the avoidance effort equally: every agent is
//! constrained to a half-plane of velocities that moves the relative velocity
//! halfway out of the pair's truncated velocity obstacle. The chosen velocity
//! is the one closest to the preferred velocity inside all half-planes and
//! the speed disc.
//!
//! Differential-drive vehicles cannot execute these holonomic velocities
//! directly. [`velocities_to_timed_paths`] therefore rolls the velocities
//! forward for a few steps and emits timed waypoint paths, which the pure
//! pursuit follower then tracks.

mod lp;

pub use lp::{solve_velocity, solve_velocity_checked};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::math::Vec2;
use crate::pursuit::{PursuitError, TimedPath, Waypoint};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RvoError {
    #[error("agents {0} and {1} are at the same position")]
    Coincident(u32, u32),
    #[error("half-plane normal must be a non-zero finite vector")]
    BadNormal,
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error(transparent)]
    Path(#[from] PursuitError),
}

/// Velocities `v` with `(v - point) . normal >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlane {
    pub point: Vec2,
    /// Unit normal pointing into the permitted side.
    pub normal: Vec2,
}

impl HalfPlane {
    /// Normalizes `normal`; rejects zero or non-finite normals.
    pub fn new(point: Vec2, normal: Vec2) -> Result<Self, RvoError> {
        let n = normal.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(RvoError::BadNormal);
        }
        Ok(Self {
            point,
            normal: normal / n,
        })
    }

    /// Signed distance of `v` into the permitted side.
    pub fn signed_distance(&self, v: Vec2) -> f64 {
        (v - self.point).dot(self.normal)
    }

    pub fn contains(&self, v: Vec2, tol: f64) -> bool {
        self.signed_distance(v) >= -tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub id: u32,
    pub position: Vec2,
    pub velocity: Vec2,
    pub radius: f64,
    pub pref_velocity: Vec2,
    pub max_speed: f64,
    /// When set, rollouts re-aim the preferred velocity at this point.
    pub goal: Option<Vec2>,
}

impl AgentState {
    pub fn new(id: u32, position: Vec2, radius: f64, max_speed: f64) -> Self {
        Self {
            id,
            position,
            velocity: Vec2::ZERO,
            radius,
            pref_velocity: Vec2::ZERO,
            max_speed,
            goal: None,
        }
    }

    pub fn with_goal(mut self, goal: Vec2) -> Self {
        self.goal = Some(goal);
        self
    }

    /// Preferred velocity toward the goal that arrives in one step of `dt`
    /// when close, capped at `max_speed`, then turned counterclockwise by
    /// `rotation` radians.
    pub fn aim(&self, dt: f64, rotation: f64) -> Vec2 {
        match self.goal {
            Some(g) => ((g - self.position) / dt).clamp_norm(self.max_speed).rotated(rotation),
            None => self.pref_velocity.clamp_norm(self.max_speed),
        }
    }
}

pub const DEFAULT_PREF_ROTATION: f64 = 0.7;

/// Defaults used by the scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RvoConfig {
    /// Time horizon of the velocity obstacles, seconds.
    pub tau: f64,
    /// Simulation step of the rollout, seconds.
    pub dt: f64,
    /// Rollout length per replanning round.
    pub k_steps: usize,
    /// Agent speed limit, m/s.
    pub max_speed: f64,
    /// Extra clearance added to each vehicle's body radius, meters.
    pub radius_margin: f64,
    /// Turn applied to goal-directed preferred velocities during rollouts,
    /// radians. A small common bias makes every agent give way to the same
    /// side, which breaks the deadlock of perfectly symmetric encounters.
    pub pref_rotation: f64,
}

impl Default for RvoConfig {
    fn default() -> Self {
        Self {
            tau: 2.0,
            dt: 0.1,
            k_steps: 10,
            max_speed: 0.12,
            radius_margin: 0.01,
            pref_rotation: DEFAULT_PREF_ROTATION,
        }
    }
}

/// One ORCA constraint per neighbor that could matter within `tau`.
///
/// Neighbors farther than `(s_a + s_b) * tau + r_a + r_b`, with `s` the larger
/// of an agent's speed limit and current speed, are skipped. Overlapping pairs
/// get the constraint that separates them within one step of `dt`.
pub fn orca_halfplanes(agent: &AgentState, neighbors: &[AgentState], tau: f64, dt: f64) -> Result<Vec<HalfPlane>, RvoError> {
    if !(tau > 0.0) {
        return Err(RvoError::InvalidParameter("tau must be > 0"));
    }
    if !(dt > 0.0) {
        return Err(RvoError::InvalidParameter("dt must be > 0"));
    }
    let mut out = Vec::with_capacity(neighbors.len());
    for other in neighbors {
        let rel_pos = other.position - agent.position;
        let dist_sq = rel_pos.norm_sq();
        if dist_sq.sqrt() < 1e-9 {
            return Err(RvoError::Coincident(agent.id, other.id));
        }
        let reach = agent.max_speed.max(agent.velocity.norm()) + other.max_speed.max(other.velocity.norm());
        let horizon = reach * tau + agent.radius + other.radius;
        if dist_sq > horizon * horizon {
            continue;
        }
        out.push(pair_constraint(agent, other, tau, dt));
    }
    Ok(out)
}

fn pair_constraint(agent: &AgentState, other: &AgentState, tau: f64, dt: f64) -> HalfPlane {
    let rel_pos = other.position - agent.position;
    let rel_vel = agent.velocity - other.velocity;
    let dist_sq = rel_pos.norm_sq();
    let combined = agent.radius + other.radius;
    let combined_sq = combined * combined;

    // `dir` keeps the permitted side on its left; `u` is the smallest change
    // of relative velocity that reaches the obstacle boundary.
    let (dir, u) = if dist_sq > combined_sq {
        let w = rel_vel - rel_pos / tau;
        let w_len_sq = w.norm_sq();
        let dot = w.dot(rel_pos);
        if dot < 0.0 && dot * dot > combined_sq * w_len_sq {
            // Closest boundary point lies on the cut-off circle.
            let w_len = w_len_sq.sqrt();
            let unit_w = w / w_len;
            (Vec2::new(unit_w.y, -unit_w.x), unit_w * (combined / tau - w_len))
        } else {
            // Closest boundary point lies on one of the cone's legs.
            let leg = (dist_sq - combined_sq).sqrt();
            let dir = if rel_pos.cross(w) > 0.0 {
                Vec2::new(rel_pos.x * leg - rel_pos.y * combined, rel_pos.x * combined + rel_pos.y * leg) / dist_sq
            } else {
                -Vec2::new(rel_pos.x * leg + rel_pos.y * combined, -rel_pos.x * combined + rel_pos.y * leg) / dist_sq
            };
            (dir, dir * rel_vel.dot(dir) - rel_vel)
        }
    } else {
        // Already overlapping: separate within one step.
        let w = rel_vel - rel_pos / dt;
        let w_len = w.norm();
        let unit_w = if w_len > 0.0 { w / w_len } else { -rel_pos.normalized() };
        (Vec2::new(unit_w.y, -unit_w.x), unit_w * (combined / dt - w_len))
    };
    HalfPlane {
        point: agent.velocity + u * 0.5,
        normal: Vec2::new(-dir.y, dir.x),
    }
}

/// New velocities for every agent, computed from one snapshot. Output order
/// matches input order.
pub fn rvo_step(agents: &[AgentState], tau: f64, dt: f64) -> Result<Vec<Vec2>, RvoError> {
    let mut out = Vec::with_capacity(agents.len());
    let mut neighbors = Vec::with_capacity(agents.len());
    for (i, agent) in agents.iter().enumerate() {
        neighbors.clear();
        neighbors.extend(agents.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, a)| *a));
        let planes = orca_halfplanes(agent, &neighbors, tau, dt)?;
        out.push(solve_velocity(&planes, agent.pref_velocity.clamp_norm(agent.max_speed), agent.max_speed));
    }
    Ok(out)
}

/// Rolls the agents forward `cfg.k_steps` steps of `cfg.dt`, re-aiming
/// preferred velocities at goals each step, and returns one path per agent
/// with waypoints at `0, dt, ..., k_steps * dt`. Also returns the final
/// states.
pub fn rollout(agents: &[AgentState], cfg: &RvoConfig) -> Result<(Vec<TimedPath>, Vec<AgentState>), RvoError> {
    let (tau, dt, k_steps) = (cfg.tau, cfg.dt, cfg.k_steps);
    if k_steps < 1 {
        return Err(RvoError::InvalidParameter("k_steps must be >= 1"));
    }
    let mut state: Vec<AgentState> = agents.to_vec();
    let mut tracks: Vec<Vec<Waypoint>> = state
        .iter()
        .map(|a| vec![Waypoint::new(a.position.x, a.position.y, 0.0)])
        .collect();
    for step in 1..=k_steps {
        for a in &mut state {
            a.pref_velocity = a.aim(dt, cfg.pref_rotation);
        }
        let velocities = rvo_step(&state, tau, dt)?;
        let t = step as f64 * dt;
        for ((a, v), track) in state.iter_mut().zip(velocities).zip(&mut tracks) {
            a.velocity = v;
            a.position += v * dt;
            track.push(Waypoint::new(a.position.x, a.position.y, t));
        }
    }
    let paths = tracks
        .into_iter()
        .map(TimedPath::with_holds)
        .collect::<Result<Vec<_>, _>>()?;
    Ok((paths, state))
}

/// Timed waypoint paths from `k_steps` of simulated ORCA motion.
/// Uses the default preference rotation.
pub fn velocities_to_timed_paths(agents: &[AgentState], tau: f64, dt: f64, k_steps: usize) -> Result<Vec<TimedPath>, RvoError> {
    let cfg = RvoConfig {
        tau,
        dt,
        k_steps,
        ..RvoConfig::default()
    };
    rollout(agents, &cfg).map(|(paths, _)| paths)
}
