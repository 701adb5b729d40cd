use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::OrchestratorError;
use crate::math::Arena;
use crate::netlink::{LinkConfig, PathPoint};
use crate::pursuit::PursuitConfig;
use crate::rvo::RvoConfig;
use crate::vehicle::VehicleParams;
use crate::world::SensorModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    FollowDrawn,
    SyncCircle,
    MinmaxHex,
    RvoSwap,
}

impl ScenarioKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::FollowDrawn => "follow_drawn",
            ScenarioKind::SyncCircle => "sync_circle",
            ScenarioKind::MinmaxHex => "minmax_hex",
            ScenarioKind::RvoSwap => "rvo_swap",
        }
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = OrchestratorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "follow_drawn" => Ok(ScenarioKind::FollowDrawn),
            "sync_circle" => Ok(ScenarioKind::SyncCircle),
            "minmax_hex" => Ok(ScenarioKind::MinmaxHex),
            "rvo_swap" => Ok(ScenarioKind::RvoSwap),
            other => Err(OrchestratorError::Config(format!("unknown scenario '{other}'"))),
        }
    }
}

impl std::fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CircleConfig {
    pub radius: f64,
    pub laps: f64,
    /// Path speed along the circle, m/s.
    pub nominal_speed: f64,
    /// Angular spacing of waypoints, degrees.
    pub waypoint_spacing_deg: f64,
}

impl Default for CircleConfig {
    fn default() -> Self {
        Self {
            radius: 0.3,
            laps: 2.0,
            nominal_speed: 0.15,
            waypoint_spacing_deg: 5.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerConfig {
    /// Grid edge length in body radii.
    pub clearance_factor: f64,
    /// Travel speed between grid vertices, m/s.
    pub nominal_speed: f64,
    pub expansion_budget: usize,
    /// Use the start vertices as goals.
    pub goals_at_starts: bool,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            clearance_factor: 3.0,
            nominal_speed: 0.1,
            expansion_budget: crate::planners::DEFAULT_EXPANSION_BUDGET,
            goals_at_starts: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SwapConfig {
    /// Radius of the circle the agents start on, meters.
    pub circle_radius: f64,
    /// Simulated seconds between velocity replans.
    pub replan_period: f64,
    /// Span of the finite difference used to estimate velocities, seconds.
    /// Longer spans average out tracker jitter.
    pub velocity_window: f64,
}

impl Default for SwapConfig {
    fn default() -> Self {
        Self {
            circle_radius: 0.35,
            replan_period: 0.5,
            velocity_window: 0.2,
        }
    }
}

/// Everything that determines a run. Two runs with equal configs produce
/// byte-identical logs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub vehicle_count: usize,
    pub loop_hz: f64,
    pub seed: u64,
    pub arena: Arena,
    pub vehicle: VehicleParams,
    pub pursuit: PursuitConfig,
    pub rvo: RvoConfig,
    pub planner: PlannerConfig,
    pub sensor: SensorModel,
    pub link: LinkConfig,
    pub circle: CircleConfig,
    pub swap: SwapConfig,
    /// Simulated seconds before a run is cut off as incomplete.
    pub tick_budget: f64,
    /// Re-send every vehicle's thrust every tick. Disabling sends only
    /// changed commands (debugging aid).
    pub resend: bool,
    /// Per-vehicle wheel-rate multipliers as `(id, scale)`.
    pub rate_scales: Vec<(u32, f64)>,
    /// Operator polylines for `follow_drawn`, one per vehicle in id order.
    pub drawn_paths: Vec<Vec<PathPoint>>,
    /// Path speed for drawn paths, m/s.
    pub drawn_speed: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioKind::SyncCircle,
            vehicle_count: 1,
            loop_hz: 30.0,
            seed: 0,
            arena: Arena::default(),
            vehicle: VehicleParams::default(),
            pursuit: PursuitConfig::default(),
            rvo: RvoConfig::default(),
            planner: PlannerConfig::default(),
            sensor: SensorModel::default(),
            link: LinkConfig::default(),
            circle: CircleConfig::default(),
            swap: SwapConfig::default(),
            tick_budget: 120.0,
            resend: true,
            rate_scales: Vec::new(),
            drawn_paths: Vec::new(),
            drawn_speed: 0.1,
        }
    }
}

impl ScenarioConfig {
    pub fn new(scenario: ScenarioKind, vehicle_count: usize) -> Self {
        Self {
            scenario,
            vehicle_count,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), OrchestratorError> {
        let bad = |m: String| Err(OrchestratorError::Config(m));
        if self.vehicle_count < 1 || self.vehicle_count > 256 {
            return bad(format!("vehicle_count must be in 1..=256, got {}", self.vehicle_count));
        }
        if !(10.0..=100.0).contains(&self.loop_hz) {
            return bad(format!("loop_hz must be in [10, 100], got {}", self.loop_hz));
        }
        if !(self.arena.width > 0.0 && self.arena.height > 0.0) {
            return bad("arena must have positive size".into());
        }
        if !(self.tick_budget > 0.0 && self.tick_budget.is_finite()) {
            return bad("tick_budget must be > 0".into());
        }
        self.vehicle.validate().map_err(|e| OrchestratorError::Config(e.to_string()))?;
        self.pursuit.validate().map_err(|e| OrchestratorError::Config(e.to_string()))?;
        self.sensor.validate().map_err(|e| OrchestratorError::Config(e.to_string()))?;
        self.link.validate().map_err(|e| OrchestratorError::Config(e.to_string()))?;
        if !(self.rvo.tau > 0.0 && self.rvo.dt > 0.0 && self.rvo.k_steps >= 1 && self.rvo.max_speed > 0.0) {
            return bad("rvo: tau, dt, max_speed must be > 0 and k_steps >= 1".into());
        }
        if !(self.swap.replan_period > 0.0) {
            return bad("swap.replan_period must be > 0".into());
        }
        if !(self.swap.velocity_window >= 0.0 && self.swap.velocity_window.is_finite()) {
            return bad("swap.velocity_window must be >= 0".into());
        }
        if !(self.circle.radius > 0.0 && self.circle.laps > 0.0 && self.circle.nominal_speed > 0.0) {
            return bad("circle radius, laps and nominal_speed must be > 0".into());
        }
        if !(self.circle.waypoint_spacing_deg > 0.0 && self.circle.waypoint_spacing_deg <= 90.0) {
            return bad("circle.waypoint_spacing_deg must be in (0, 90]".into());
        }
        if !(self.planner.nominal_speed > 0.0 && self.drawn_speed > 0.0) {
            return bad("nominal speeds must be > 0".into());
        }
        for &(id, s) in &self.rate_scales {
            if id as usize >= self.vehicle_count {
                return bad(format!("rate_scales names unknown vehicle {id}"));
            }
            if !(s > 0.0 && s.is_finite()) {
                return bad(format!("rate scale {s} must be > 0"));
            }
        }
        if self.loop_hz > 2.0 * self.sensor.fps {
            log::warn!(
                "control loop at {} Hz runs more than twice as fast as the {} fps tracker",
                self.loop_hz,
                self.sensor.fps
            );
        }
        Ok(())
    }

    pub fn tick_dt(&self) -> f64 {
        1.0 / self.loop_hz
    }

    /// Applies a JSON object of overrides using the same keys as the
    /// serialized config. Nested objects merge key by key.
    pub fn with_overrides(&self, overrides: &Value) -> Result<Self, OrchestratorError> {
        let mut base = serde_json::to_value(self).expect("config serializes");
        merge(&mut base, overrides);
        let cfg: ScenarioConfig =
            serde_json::from_value(base).map_err(|e| OrchestratorError::Config(format!("bad override: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn merge(base: &mut Value, patch: &Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k.clone(), v.clone());
                    }
                }
            }
        }
        (slot, v) => *slot = v.clone(),
    }
}
