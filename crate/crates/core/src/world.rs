//! Simulated arena and overhead tracker.
//!
//! Vehicles hold their last commanded thrust until a new command arrives,
//! are clamped at the walls, and pass through each other (overlaps are only
//! reported). The tracker produces frames at multiples of `1 / fps`; queries
//! between frame instants return the most recent frame.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::math::Arena;
use crate::netlink::{PoseFrame, TagPose, ThrustFrame};
use crate::vehicle::{integrate, Pose2D, VehicleError, VehicleParams, WheelThrust};

/// Largest integration substep used by [`World::tick`].
pub const MAX_SUBSTEP: f64 = 0.01;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WorldError {
    #[error("unknown vehicle id {0}")]
    UnknownVehicle(u32),
    #[error("duplicate vehicle id {0}")]
    DuplicateVehicle(u32),
    #[error("vehicle {0} placed outside the arena")]
    OutsideArena(u32),
    #[error("vehicles {0} and {1} placed closer than two body radii")]
    Overlapping(u32, u32),
    #[error("dt must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("invalid sensor model: {0}")]
    InvalidSensor(&'static str),
    #[error("invalid rate scale {0}")]
    InvalidRateScale(f64),
    #[error(transparent)]
    Vehicle(#[from] VehicleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SensorModel {
    /// Position noise standard deviation, meters.
    pub sigma_xy: f64,
    /// Heading noise standard deviation, radians.
    pub sigma_theta: f64,
    pub fps: f64,
    /// Chance that a tag is missing from a frame.
    pub miss_probability: f64,
}

impl Default for SensorModel {
    fn default() -> Self {
        Self {
            sigma_xy: 0.002,
            sigma_theta: 0.017,
            fps: 30.0,
            miss_probability: 0.005,
        }
    }
}

impl SensorModel {
    /// Noise-free, never-missing tracker at `fps`.
    pub fn perfect(fps: f64) -> Self {
        Self {
            sigma_xy: 0.0,
            sigma_theta: 0.0,
            fps,
            miss_probability: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), WorldError> {
        if !(self.sigma_xy >= 0.0 && self.sigma_xy.is_finite()) {
            return Err(WorldError::InvalidSensor("sigma_xy must be >= 0"));
        }
        if !(self.sigma_theta >= 0.0 && self.sigma_theta.is_finite()) {
            return Err(WorldError::InvalidSensor("sigma_theta must be >= 0"));
        }
        if !(self.fps > 0.0 && self.fps.is_finite()) {
            return Err(WorldError::InvalidSensor("fps must be > 0"));
        }
        if !(0.0..1.0).contains(&self.miss_probability) {
            return Err(WorldError::InvalidSensor("miss_probability must be in [0, 1)"));
        }
        Ok(())
    }

    /// Index of the most recent frame at time `t`.
    pub fn frame_index(&self, t: f64) -> u64 {
        (t * self.fps + 1e-9).floor().max(0.0) as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum WorldEvent {
    /// The vehicle was pushed back inside the arena.
    WallContact { t: f64, id: u32 },
    /// Two bodies overlap at the end of a tick.
    Overlap { t: f64, a: u32, b: u32, distance: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct VehicleSlot {
    pub pose: Pose2D,
    pub params: VehicleParams,
    pub thrust: WheelThrust,
    pub last_command: Option<ThrustFrame>,
    pub rate_scale: f64,
}

#[derive(Debug, Clone)]
pub struct World {
    arena: Arena,
    vehicles: BTreeMap<u32, VehicleSlot>,
    clock: f64,
    // Running compensation term so long runs of equal steps do not drift.
    clock_carry: f64,
    seed: u64,
    rng: ChaCha8Rng,
    last_frame: Option<(u64, PoseFrame)>,
    events: Vec<WorldEvent>,
}

impl World {
    pub fn new(arena: Arena, seed: u64) -> Self {
        Self {
            arena,
            vehicles: BTreeMap::new(),
            clock: 0.0,
            clock_carry: 0.0,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            last_frame: None,
            events: Vec::new(),
        }
    }

    /// Adds a vehicle at rest. Placement rules match [`World::reset`].
    pub fn add_vehicle(&mut self, id: u32, pose: Pose2D, params: VehicleParams) -> Result<(), WorldError> {
        params.validate()?;
        if self.vehicles.contains_key(&id) {
            return Err(WorldError::DuplicateVehicle(id));
        }
        if !pose.is_finite() || !self.arena.contains_disc(pose.position(), params.body_radius) {
            return Err(WorldError::OutsideArena(id));
        }
        for (&other, slot) in &self.vehicles {
            if pose.position().distance(slot.pose.position()) <= params.body_radius + slot.params.body_radius {
                return Err(WorldError::Overlapping(other, id));
            }
        }
        self.vehicles.insert(
            id,
            VehicleSlot {
                pose,
                params,
                thrust: WheelThrust::ZERO,
                last_command: None,
                rate_scale: 1.0,
            },
        );
        Ok(())
    }

    /// Scales a vehicle's top wheel rate, modelling weak motors or a low
    /// battery.
    pub fn set_rate_scale(&mut self, id: u32, scale: f64) -> Result<(), WorldError> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(WorldError::InvalidRateScale(scale));
        }
        self.vehicles.get_mut(&id).ok_or(WorldError::UnknownVehicle(id))?.rate_scale = scale;
        Ok(())
    }

    /// Moves the listed vehicles, zeroes all thrusts, rewinds the clock and
    /// the noise generator. Nothing changes on error.
    pub fn reset(&mut self, placements: &[(u32, Pose2D)]) -> Result<(), WorldError> {
        let mut poses: BTreeMap<u32, Pose2D> = self.vehicles.iter().map(|(&id, s)| (id, s.pose)).collect();
        for &(id, pose) in placements {
            let slot = self.vehicles.get(&id).ok_or(WorldError::UnknownVehicle(id))?;
            if !pose.is_finite() || !self.arena.contains_disc(pose.position(), slot.params.body_radius) {
                return Err(WorldError::OutsideArena(id));
            }
            poses.insert(id, pose);
        }
        let ids: Vec<u32> = poses.keys().copied().collect();
        for (i, &a) in ids.iter().enumerate() {
            for &b in &ids[i + 1..] {
                let min = self.vehicles[&a].params.body_radius + self.vehicles[&b].params.body_radius;
                if poses[&a].position().distance(poses[&b].position()) <= min {
                    return Err(WorldError::Overlapping(a, b));
                }
            }
        }
        for (id, slot) in &mut self.vehicles {
            slot.pose = poses[id];
            slot.thrust = WheelThrust::ZERO;
            slot.last_command = None;
        }
        self.clock = 0.0;
        self.clock_carry = 0.0;
        self.rng = ChaCha8Rng::seed_from_u64(self.seed);
        self.last_frame = None;
        self.events.clear();
        Ok(())
    }

    /// Applies the latest command per vehicle, then advances every vehicle
    /// by `dt` under its held thrust.
    pub fn tick(&mut self, commands: &[ThrustFrame], dt: f64) -> Result<(), WorldError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(WorldError::InvalidStep(dt));
        }
        if let Some(c) = commands.iter().find(|c| !self.vehicles.contains_key(&u32::from(c.vehicle_id))) {
            return Err(WorldError::UnknownVehicle(u32::from(c.vehicle_id)));
        }
        for c in commands {
            let slot = self.vehicles.get_mut(&u32::from(c.vehicle_id)).expect("checked above");
            slot.thrust = c.thrust();
            slot.last_command = Some(*c);
        }

        let substeps = (dt / MAX_SUBSTEP).ceil().max(1.0) as usize;
        let h = dt / substeps as f64;
        // Kahan summation of the clock.
        let step = dt - self.clock_carry;
        let t_end = self.clock + step;
        let carry = (t_end - self.clock) - step;
        for (&id, slot) in &mut self.vehicles {
            if slot.thrust == WheelThrust::ZERO {
                continue;
            }
            let mut params = slot.params;
            params.max_wheel_rate *= slot.rate_scale;
            let mut walled = false;
            for _ in 0..substeps {
                let mut next = integrate(&slot.pose, slot.thrust, &params, h)?;
                let r = params.body_radius;
                let cx = next.x.clamp(r, self.arena.width - r);
                let cy = next.y.clamp(r, self.arena.height - r);
                if cx != next.x || cy != next.y {
                    walled = true;
                    next.x = cx;
                    next.y = cy;
                }
                slot.pose = next;
            }
            if walled {
                self.events.push(WorldEvent::WallContact { t: t_end, id });
            }
        }
        self.clock = t_end;
        self.clock_carry = carry;

        let slots: Vec<(u32, &VehicleSlot)> = self.vehicles.iter().map(|(&id, s)| (id, s)).collect();
        for (i, &(a, sa)) in slots.iter().enumerate() {
            for &(b, sb) in &slots[i + 1..] {
                let d = sa.pose.position().distance(sb.pose.position());
                if d < sa.params.body_radius + sb.params.body_radius {
                    self.events.push(WorldEvent::Overlap { t: t_end, a, b, distance: d });
                }
            }
        }
        Ok(())
    }

    /// The tracker frame current at the world clock. Noise is drawn once per
    /// frame; repeated queries within a frame period return the same frame.
    pub fn observe(&mut self, sensor: &SensorModel) -> PoseFrame {
        let index = sensor.frame_index(self.clock);
        if let Some((k, frame)) = &self.last_frame {
            if *k == index {
                return frame.clone();
            }
        }
        let t = index as f64 / sensor.fps;
        let mut poses = Vec::with_capacity(self.vehicles.len());
        for (&id, slot) in &self.vehicles {
            let nx: f64 = self.rng.sample(StandardNormal);
            let ny: f64 = self.rng.sample(StandardNormal);
            let nth: f64 = self.rng.sample(StandardNormal);
            let miss: f64 = self.rng.gen();
            if miss < sensor.miss_probability {
                continue;
            }
            let noisy = Pose2D::new(
                slot.pose.x + sensor.sigma_xy * nx,
                slot.pose.y + sensor.sigma_xy * ny,
                slot.pose.theta + sensor.sigma_theta * nth,
            );
            poses.push(TagPose::new(id, &noisy));
        }
        let frame = PoseFrame { t, poses };
        self.last_frame = Some((index, frame.clone()));
        frame
    }

    pub fn arena(&self) -> Arena {
        self.arena
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn ids(&self) -> Vec<u32> {
        self.vehicles.keys().copied().collect()
    }

    pub fn vehicle(&self, id: u32) -> Option<&VehicleSlot> {
        self.vehicles.get(&id)
    }

    pub fn pose(&self, id: u32) -> Option<Pose2D> {
        self.vehicles.get(&id).map(|s| s.pose)
    }

    /// Ground-truth poses in id order.
    pub fn poses(&self) -> Vec<(u32, Pose2D)> {
        self.vehicles.iter().map(|(&id, s)| (id, s.pose)).collect()
    }

    pub fn events(&self) -> &[WorldEvent] {
        &self.events
    }

    pub fn take_events(&mut self) -> Vec<WorldEvent> {
        std::mem::take(&mut self.events)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params_for_speed(v: f64) -> VehicleParams {
        let mut p = VehicleParams::default();
        // 0.7 thrust on both wheels gives forward speed r * rate * 0.7.
        p.max_wheel_rate = v / (0.7 * p.wheel_radius);
        p
    }

    #[test]
    fn no_commands_no_motion() {
        let mut w = World::new(Arena::default(), 1);
        w.add_vehicle(0, Pose2D::new(0.3, 0.3, 0.4), VehicleParams::default()).unwrap();
        let before = w.poses();
        for _ in 0..10 {
            w.tick(&[], 0.37).unwrap();
        }
        assert_eq!(w.poses(), before);
        assert!((w.clock() - 3.7).abs() < 1e-12);
    }

    #[test]
    fn held_thrust_straight_line() {
        let mut w = World::new(Arena::default(), 1);
        w.add_vehicle(0, Pose2D::new(0.3, 0.3, 0.0), params_for_speed(0.1)).unwrap();
        w.tick(&[ThrustFrame::new(0, 70, 70).unwrap()], 1.0).unwrap();
        let p = w.pose(0).unwrap();
        assert!((p.x - 0.4).abs() < 1e-12 && (p.y - 0.3).abs() < 1e-15 && p.theta == 0.0);
        // Thrust is held without a new command.
        w.tick(&[], 1.0).unwrap();
        assert!((w.pose(0).unwrap().x - 0.5).abs() < 1e-12);
    }

    #[test]
    fn wall_clamps_and_logs() {
        let mut w = World::new(Arena::default(), 1);
        let p = VehicleParams::default();
        let start = Pose2D::new(1.5 - p.body_radius, 0.4, 0.0);
        w.add_vehicle(0, start, p).unwrap();
        w.tick(&[ThrustFrame::new(0, 100, 100).unwrap()], 0.5).unwrap();
        let now = w.pose(0).unwrap();
        assert_eq!(now.x, start.x);
        assert_eq!(now.y, start.y);
        assert!(matches!(w.events()[0], WorldEvent::WallContact { id: 0, .. }));
    }

    #[test]
    fn overlap_is_reported_not_resolved() {
        let mut w = World::new(Arena::default(), 1);
        let p = params_for_speed(0.1);
        w.add_vehicle(0, Pose2D::new(0.3, 0.3, 0.0), p).unwrap();
        w.add_vehicle(1, Pose2D::new(0.5, 0.3, std::f64::consts::PI), p).unwrap();
        let go = [ThrustFrame::new(0, 70, 70).unwrap(), ThrustFrame::new(1, 70, 70).unwrap()];
        w.tick(&go, 0.8).unwrap();
        assert!(w.events().iter().any(|e| matches!(e, WorldEvent::Overlap { a: 0, b: 1, .. })));
    }

    #[test]
    fn unknown_command_rejected_atomically() {
        let mut w = World::new(Arena::default(), 1);
        w.add_vehicle(0, Pose2D::new(0.3, 0.3, 0.0), VehicleParams::default()).unwrap();
        let cmds = [ThrustFrame::new(0, 50, 50).unwrap(), ThrustFrame::new(9, 50, 50).unwrap()];
        assert_eq!(w.tick(&cmds, 0.1), Err(WorldError::UnknownVehicle(9)));
        assert_eq!(w.vehicle(0).unwrap().thrust, WheelThrust::ZERO);
        assert_eq!(w.clock(), 0.0);
        assert!(w.tick(&[], 0.0).is_err());
    }

    #[test]
    fn latest_command_wins() {
        let mut w = World::new(Arena::default(), 1);
        w.add_vehicle(0, Pose2D::new(0.3, 0.3, 0.0), VehicleParams::default()).unwrap();
        let cmds = [ThrustFrame::new(0, 50, 50).unwrap(), ThrustFrame::new(0, -20, 30).unwrap()];
        w.tick(&cmds, 0.01).unwrap();
        assert_eq!(w.vehicle(0).unwrap().last_command, Some(cmds[1]));
    }

    #[test]
    fn reset_rules() {
        let mut w = World::new(Arena::default(), 1);
        let p = VehicleParams::default();
        for id in 0..6 {
            w.add_vehicle(id, Pose2D::new(0.2 + 0.2 * id as f64, 0.45, 0.0), p).unwrap();
        }
        w.tick(&[ThrustFrame::new(0, 10, 10).unwrap()], 0.5).unwrap();
        let placements: Vec<(u32, Pose2D)> = (0..6).map(|id| (id, Pose2D::new(0.2 + 0.2 * id as f64, 0.3, 1.0))).collect();
        w.reset(&placements).unwrap();
        assert_eq!(w.clock(), 0.0);
        assert!(w.ids().iter().all(|&id| w.vehicle(id).unwrap().thrust == WheelThrust::ZERO));

        assert_eq!(w.reset(&[(0, Pose2D::new(-0.5, 0.3, 0.0))]), Err(WorldError::OutsideArena(0)));
        let close = [(0, Pose2D::new(0.5, 0.6, 0.0)), (1, Pose2D::new(0.501, 0.6, 0.0))];
        assert!(matches!(w.reset(&close), Err(WorldError::Overlapping(..))));
        assert_eq!(w.pose(0).unwrap(), placements[0].1);
    }

    #[test]
    fn perfect_sensor_is_exact() {
        let mut w = World::new(Arena::default(), 3);
        w.add_vehicle(4, Pose2D::new(0.3, 0.3, 0.2), VehicleParams::default()).unwrap();
        w.tick(&[ThrustFrame::new(4, 30, 60).unwrap()], 1.0 / 30.0).unwrap();
        let f = w.observe(&SensorModel::perfect(30.0));
        assert_eq!(f.t, 1.0 / 30.0);
        assert_eq!(f.poses, vec![TagPose::new(4, &w.pose(4).unwrap())]);
    }

    #[test]
    fn frames_are_gated() {
        let mut w = World::new(Arena::default(), 3);
        w.add_vehicle(0, Pose2D::new(0.3, 0.3, 0.0), VehicleParams::default()).unwrap();
        let s = SensorModel::default();
        w.tick(&[], 0.5).unwrap();
        let a = w.observe(&s);
        w.tick(&[], 0.001).unwrap();
        let b = w.observe(&s);
        assert_eq!(a, b);
        assert_eq!(a.t, 15.0 / 30.0);
    }

    #[test]
    fn sensor_validation() {
        assert!(SensorModel::default().validate().is_ok());
        let bad = SensorModel {
            fps: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = SensorModel {
            miss_probability: 1.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
