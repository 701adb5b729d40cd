use std::collections::VecDeque;

use log::debug;

use super::scenarios::{setup, Setup};
use super::{estimate_velocity, OrchestratorError, ScenarioConfig, ScenarioKind, TickRecord};
use crate::math::Vec2;
use crate::netlink::{Ack, CommandKind, ConsoleCommand, LossyLink, PoseFrame, TagPose, ThrustDecoder, ThrustFrame};
use crate::planners::HexGrid;
use crate::pursuit::{follow_step, FollowState, TimedPath};
use crate::rvo::{rollout, AgentState};
use crate::vehicle::{Pose2D, WheelThrust};
use crate::world::World;

/// The closed control loop for one scenario.
///
/// Each [`Session::step`] observes the tracker frame, updates plans, runs
/// pure pursuit for every vehicle from observed poses only, pushes thrust
/// frames through the lossy link and advances the world by one loop period.
pub struct Session {
    cfg: ScenarioConfig,
    world: World,
    link: LossyLink,
    decoder: ThrustDecoder,
    ids: Vec<u32>,
    follow: Vec<Option<FollowState>>,
    belief: Vec<Option<Pose2D>>,
    velocity: Vec<Vec2>,
    history: VecDeque<PoseFrame>,
    goals: Vec<Vec2>,
    grid: Option<HexGrid>,
    last_sent: Vec<Option<ThrustFrame>>,
    last_frame: PoseFrame,
    tick: u64,
    next_replan: u64,
    stopped: bool,
}

impl Session {
    pub fn new(cfg: ScenarioConfig) -> Result<Self, OrchestratorError> {
        cfg.validate()?;
        let Setup {
            placements,
            paths,
            goals,
            grid,
        } = setup(&cfg)?;
        let mut world = World::new(cfg.arena, cfg.seed);
        let ids: Vec<u32> = (0..cfg.vehicle_count as u32).collect();
        for (&id, pose) in ids.iter().zip(&placements) {
            world
                .add_vehicle(id, *pose, cfg.vehicle)
                .map_err(|e| OrchestratorError::Scenario {
                    scenario: cfg.scenario.name(),
                    message: e.to_string(),
                })?;
        }
        for &(id, s) in &cfg.rate_scales {
            world
                .set_rate_scale(id, s)
                .map_err(|e| OrchestratorError::Config(e.to_string()))?;
        }
        let mut link_cfg = cfg.link;
        // Keep link losses independent of the tracker noise stream.
        link_cfg.seed = cfg.link.seed ^ cfg.seed.rotate_left(32);
        let link = LossyLink::new(link_cfg).map_err(|e| OrchestratorError::Config(e.to_string()))?;
        let n = ids.len();
        Ok(Self {
            world,
            link,
            decoder: ThrustDecoder::new(),
            follow: paths.into_iter().map(|p| p.map(FollowState::new)).collect(),
            belief: vec![None; n],
            velocity: vec![Vec2::ZERO; n],
            history: VecDeque::new(),
            goals,
            grid,
            last_sent: vec![None; n],
            last_frame: PoseFrame::default(),
            tick: 0,
            next_replan: 0,
            stopped: false,
            ids,
            cfg,
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn grid(&self) -> Option<&HexGrid> {
        self.grid.as_ref()
    }

    /// Simulated time of the next tick.
    pub fn time(&self) -> f64 {
        self.tick as f64 / self.cfg.loop_hz
    }

    pub fn tick_count(&self) -> u64 {
        self.tick
    }

    /// Most recent tracker frame seen by the controller.
    pub fn last_frame(&self) -> &PoseFrame {
        &self.last_frame
    }

    pub fn path(&self, index: usize) -> Option<&TimedPath> {
        self.follow.get(index)?.as_ref().map(|f| &f.path)
    }

    /// True once every vehicle has finished its task or the run was stopped.
    pub fn is_complete(&self) -> bool {
        if self.stopped {
            return true;
        }
        match self.cfg.scenario {
            ScenarioKind::RvoSwap => (0..self.ids.len()).all(|i| {
                let at_goal = self.belief[i]
                    .is_some_and(|p| p.position().distance(self.goals[i]) <= self.cfg.pursuit.goal_tolerance);
                at_goal && self.follow[i].as_ref().is_none_or(|f| f.done)
            }),
            // Vehicles without a path are idle.
            _ => self.follow.iter().all(|f| f.as_ref().is_none_or(|f| f.done)),
        }
    }

    /// Runs one control period and returns its record.
    pub fn step(&mut self) -> Result<TickRecord, OrchestratorError> {
        let now = self.time();
        let frame = self.world.observe(&self.cfg.sensor);
        self.update_belief(&frame);

        if self.cfg.scenario == ScenarioKind::RvoSwap && !self.stopped && self.tick >= self.next_replan {
            self.replan_rvo(now)?;
            let period = (self.cfg.swap.replan_period * self.cfg.loop_hz).round().max(1.0) as u64;
            self.next_replan = self.tick + period;
        }

        let mut thrusts = Vec::with_capacity(self.ids.len());
        for i in 0..self.ids.len() {
            let thrust = match (&mut self.follow[i], self.belief[i]) {
                (Some(state), Some(pose)) if !self.stopped => {
                    follow_step(state, &pose, now, &self.cfg.pursuit, &self.cfg.vehicle).map_err(|e| {
                        OrchestratorError::Scenario {
                            scenario: self.cfg.scenario.name(),
                            message: format!("vehicle {}: {e}", self.ids[i]),
                        }
                    })?
                }
                _ => WheelThrust::ZERO,
            };
            thrusts.push(ThrustFrame::from_thrust(self.ids[i] as u8, thrust));
        }

        let truth = self.world.poses();
        let mut cross_track = Vec::with_capacity(truth.len());
        let mut schedule_error = Vec::with_capacity(truth.len());
        for (i, (_, pose)) in truth.iter().enumerate() {
            match &self.follow[i] {
                Some(f) => {
                    cross_track.push(Some(f.path.distance_to(pose.position())));
                    schedule_error.push(Some(f.schedule_error(pose, now, &self.cfg.pursuit)));
                }
                None => {
                    cross_track.push(None);
                    schedule_error.push(None);
                }
            }
        }

        for (i, f) in thrusts.iter().enumerate() {
            if self.cfg.resend || self.last_sent[i] != Some(*f) {
                self.link.send_frames(now, std::slice::from_ref(f));
                self.last_sent[i] = Some(*f);
            }
        }
        self.decoder.push(&self.link.receive(now));
        let delivered = self.decoder.drain_frames();

        self.world.tick(&delivered, self.cfg.tick_dt()).map_err(|e| OrchestratorError::Scenario {
            scenario: self.cfg.scenario.name(),
            message: e.to_string(),
        })?;
        let events = self.world.take_events();
        let record = TickRecord {
            tick: self.tick,
            t: now,
            poses: truth.iter().map(|(id, p)| TagPose::new(*id, p)).collect(),
            thrusts,
            events,
            cross_track,
            schedule_error,
        };
        self.last_frame = frame;
        self.tick += 1;
        Ok(record)
    }

    fn update_belief(&mut self, frame: &PoseFrame) {
        if self.history.back().is_some_and(|p| frame.t <= p.t) {
            // Same tracker frame as last tick.
            return;
        }
        self.history.push_back(frame.clone());
        let cutoff = frame.t - self.cfg.swap.velocity_window;
        while self.history.len() > 2 && self.history[1].t <= cutoff + 1e-9 {
            self.history.pop_front();
        }
        let oldest = &self.history[0];
        for (i, &id) in self.ids.iter().enumerate() {
            // A missed tag keeps the previous estimate.
            if oldest.t < frame.t {
                if let Ok(v) = estimate_velocity(oldest, frame, id) {
                    self.velocity[i] = v;
                }
            }
            if let Some(p) = frame.get(id) {
                self.belief[i] = Some(p.pose());
            }
        }
    }

    fn replan_rvo(&mut self, now: f64) -> Result<(), OrchestratorError> {
        let radius = self.cfg.vehicle.body_radius + self.cfg.rvo.radius_margin;
        let max_speed = self.cfg.rvo.max_speed;
        let mut agents = Vec::with_capacity(self.ids.len());
        let mut index = Vec::with_capacity(self.ids.len());
        for (i, &id) in self.ids.iter().enumerate() {
            let Some(pose) = self.belief[i] else { continue };
            let mut a = AgentState::new(id, pose.position(), radius, max_speed).with_goal(self.goals[i]);
            a.velocity = self.velocity[i].clamp_norm(max_speed);
            agents.push(a);
            index.push(i);
        }
        if agents.is_empty() {
            return Ok(());
        }
        let (paths, _) = rollout(&agents, &self.cfg.rvo)
            .map_err(|e| OrchestratorError::Scenario {
                scenario: self.cfg.scenario.name(),
                message: e.to_string(),
            })?;
        for (i, path) in index.into_iter().zip(paths) {
            self.follow[i] = Some(FollowState::new(path.shifted(now)));
        }
        debug!("rvo replan at t={now:.3}");
        Ok(())
    }

    /// Applies an operator command at the next tick boundary.
    pub fn apply_command(&mut self, cmd: &ConsoleCommand) -> Ack {
        if let Err(reason) = cmd.validate(&self.cfg.arena, &self.ids) {
            return Ack::rejected(Some(cmd.kind), reason);
        }
        let now = self.time();
        let points: Vec<Vec2> = cmd.waypoints.iter().flatten().map(|&p| p.into()).collect();
        match cmd.kind {
            CommandKind::DrawPath | CommandKind::SetGoal => {
                let id = cmd.vehicle_id.expect("validated");
                let i = self.ids.iter().position(|&v| v == id).expect("validated");
                let mut poly = Vec::with_capacity(points.len() + 1);
                if cmd.kind == CommandKind::SetGoal {
                    let Some(here) = self.belief[i] else {
                        return Ack::rejected(Some(cmd.kind), "vehicle not visible");
                    };
                    poly.push(here.position());
                    poly.push(points[0]);
                } else {
                    poly = points;
                }
                match TimedPath::from_polyline(&poly, self.cfg.drawn_speed, now) {
                    Ok(path) => {
                        self.follow[i] = Some(FollowState::new(path));
                        self.stopped = false;
                        Ack::accepted(cmd.kind)
                    }
                    Err(e) => Ack::rejected(Some(cmd.kind), e.to_string()),
                }
            }
            CommandKind::Stop => {
                self.stopped = true;
                for f in &mut self.follow {
                    *f = None;
                }
                Ack::accepted(cmd.kind)
            }
            // Switching scenarios replaces the session; the owner handles it.
            CommandKind::StartScenario => Ack::rejected(Some(cmd.kind), "start_scenario is handled by the server"),
        }
    }
}
