//! Closed-loop scenarios, record and replay.
//!
//! The loop runs in simulated time: tick `k` happens at `k / loop_hz`
//! whatever the wall clock says, so logs depend only on the configuration.

mod config;
mod runlog;
mod scenarios;
mod session;

pub use runlog::{RunHeader, RunLog, RunSummary, TickRecord, CRATE_VERSION, LOG_FORMAT};
pub use config::{CircleConfig, PlannerConfig, ScenarioConfig, ScenarioKind, SwapConfig};
pub use session::Session;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::math::Vec2;
use crate::netlink::PoseFrame;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrchestratorError {
    #[error("config: {0}")]
    Config(String),
    #[error("{scenario}: {message}")]
    Scenario { scenario: &'static str, message: String },
    #[error("log: {0}")]
    Log(String),
    #[error("log header mismatch: {0}")]
    HeaderMismatch(String),
    #[error("vehicle {0} missing from frame")]
    MissingId(u32),
    #[error("frame timestamps do not increase ({prev} then {curr})")]
    NonIncreasingTime { prev: f64, curr: f64 },
}

/// Two-frame finite-difference velocity of one vehicle.
pub fn estimate_velocity(prev: &PoseFrame, curr: &PoseFrame, id: u32) -> Result<Vec2, OrchestratorError> {
    if !(curr.t > prev.t) {
        return Err(OrchestratorError::NonIncreasingTime { prev: prev.t, curr: curr.t });
    }
    let a = prev.get(id).ok_or(OrchestratorError::MissingId(id))?;
    let b = curr.get(id).ok_or(OrchestratorError::MissingId(id))?;
    let dt = curr.t - prev.t;
    Ok(Vec2::new((b.x - a.x) / dt, (b.y - a.y) / dt))
}

/// Runs a scenario to completion or until the tick budget runs out.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunLog, OrchestratorError> {
    run_scenario_with(cfg, |_| {})
}

/// [`run_scenario`] with a callback after every tick, for pacing or
/// progress output. The callback cannot change the run.
pub fn run_scenario_with(cfg: &ScenarioConfig, mut on_tick: impl FnMut(&TickRecord)) -> Result<RunLog, OrchestratorError> {
    let mut session = Session::new(cfg.clone())?;
    let mut ticks = Vec::new();
    let budget_ticks = (cfg.tick_budget * cfg.loop_hz).round() as u64;
    let summary = loop {
        if session.tick_count() >= budget_ticks {
            break RunSummary {
                complete: false,
                ticks: ticks.len() as u64,
                reason: "incomplete: tick budget expired".into(),
            };
        }
        let record = session.step()?;
        on_tick(&record);
        ticks.push(record);
        if session.is_complete() {
            break RunSummary {
                complete: true,
                ticks: ticks.len() as u64,
                reason: "all vehicles done".into(),
            };
        }
    };
    Ok(RunLog {
        header: RunHeader::new(cfg),
        ticks,
        summary,
    })
}

/// First place a replayed run disagrees with a recorded one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Divergence {
    pub tick: u64,
    pub field: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub ticks_checked: u64,
    pub divergences: usize,
    pub first: Option<Divergence>,
}

impl ReplayReport {
    pub fn is_clean(&self) -> bool {
        self.divergences == 0
    }
}

/// Re-executes the run described by the log header and compares poses and
/// thrusts tick by tick.
pub fn replay(log: &RunLog) -> Result<ReplayReport, OrchestratorError> {
    if log.header.format != LOG_FORMAT {
        return Err(OrchestratorError::HeaderMismatch(format!(
            "log format {} but this build reads {LOG_FORMAT}",
            log.header.format
        )));
    }
    if log.header.version != CRATE_VERSION {
        return Err(OrchestratorError::HeaderMismatch(format!(
            "log written by {} but this is {CRATE_VERSION}",
            log.header.version
        )));
    }
    if log.header.seed != log.header.config.seed {
        return Err(OrchestratorError::HeaderMismatch("header seed differs from config seed".into()));
    }
    if !log.summary.complete {
        return Err(OrchestratorError::Log("cannot replay an incomplete log".into()));
    }
    let fresh = run_scenario(&log.header.config)?;
    let mut divergences = 0;
    let mut first = None;
    let n = log.ticks.len().max(fresh.ticks.len());
    for k in 0..n {
        let field = match (log.ticks.get(k), fresh.ticks.get(k)) {
            (Some(a), Some(b)) if a.poses != b.poses => Some("poses"),
            (Some(a), Some(b)) if a.thrusts != b.thrusts => Some("thrusts"),
            (Some(_), Some(_)) => None,
            _ => Some("tick count"),
        };
        if let Some(field) = field {
            divergences += 1;
            if first.is_none() {
                first = Some(Divergence {
                    tick: k as u64,
                    field: field.to_string(),
                });
            }
        }
    }
    Ok(ReplayReport {
        ticks_checked: n as u64,
        divergences,
        first,
    })
}
