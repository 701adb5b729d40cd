use serde::{Deserialize, Serialize};

use super::{OrchestratorError, ScenarioConfig};
use crate::netlink::{TagPose, ThrustFrame};
use crate::world::WorldEvent;

pub const LOG_FORMAT: u32 = 1;
pub const CRATE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunHeader {
    pub format: u32,
    pub version: String,
    pub seed: u64,
    pub config: ScenarioConfig,
}

impl RunHeader {
    pub fn new(config: &ScenarioConfig) -> Self {
        Self {
            format: LOG_FORMAT,
            version: CRATE_VERSION.to_string(),
            seed: config.seed,
            config: config.clone(),
        }
    }
}

/// One control tick. `poses` are ground truth at time `t`, before the world
/// advances; `thrusts` are the controller's commands issued at `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub tick: u64,
    pub t: f64,
    pub poses: Vec<TagPose>,
    pub thrusts: Vec<ThrustFrame>,
    pub events: Vec<WorldEvent>,
    /// Per vehicle, distance from the true position to the reference path
    /// (`null` without a path).
    pub cross_track: Vec<Option<f64>>,
    /// Per vehicle, scheduled minus achieved arclength, meters.
    pub schedule_error: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub complete: bool,
    pub ticks: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunLog {
    pub header: RunHeader,
    pub ticks: Vec<TickRecord>,
    pub summary: RunSummary,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
enum Line {
    Header(RunHeader),
    Tick(TickRecord),
    End(RunSummary),
}

impl RunLog {
    pub fn complete(&self) -> bool {
        self.summary.complete
    }

    /// Header line, one line per tick, and a closing summary line.
    pub fn to_ndjson(&self) -> String {
        let mut out = String::new();
        let mut push = |l: &Line| {
            out.push_str(&serde_json::to_string(l).expect("log lines serialize"));
            out.push('\n');
        };
        push(&Line::Header(self.header.clone()));
        for t in &self.ticks {
            push(&Line::Tick(t.clone()));
        }
        push(&Line::End(self.summary.clone()));
        out
    }

    pub fn from_ndjson(text: &str) -> Result<Self, OrchestratorError> {
        let mut header = None;
        let mut ticks = Vec::new();
        let mut summary = None;
        for (i, raw) in text.lines().enumerate() {
            if raw.trim().is_empty() {
                continue;
            }
            let line: Line =
                serde_json::from_str(raw).map_err(|e| OrchestratorError::Log(format!("line {}: {e}", i + 1)))?;
            match line {
                Line::Header(h) if header.is_none() && ticks.is_empty() => header = Some(h),
                Line::Header(_) => return Err(OrchestratorError::Log(format!("line {}: unexpected header", i + 1))),
                Line::Tick(t) => {
                    if header.is_none() || summary.is_some() {
                        return Err(OrchestratorError::Log(format!("line {}: tick outside the run", i + 1)));
                    }
                    if t.tick != ticks.len() as u64 {
                        return Err(OrchestratorError::Log(format!("line {}: ticks not contiguous", i + 1)));
                    }
                    ticks.push(t);
                }
                Line::End(s) => summary = Some(s),
            }
        }
        let header = header.ok_or_else(|| OrchestratorError::Log("missing header".into()))?;
        let summary = summary.ok_or_else(|| OrchestratorError::Log("missing end record".into()))?;
        Ok(Self { header, ticks, summary })
    }

    /// Largest pairwise difference of schedule errors at each tick.
    pub fn max_schedule_skew(&self) -> f64 {
        self.ticks
            .iter()
            .map(|t| {
                let e: Vec<f64> = t.schedule_error.iter().flatten().copied().collect();
                let hi = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let lo = e.iter().copied().fold(f64::INFINITY, f64::min);
                if e.is_empty() {
                    0.0
                } else {
                    hi - lo
                }
            })
            .fold(0.0, f64::max)
    }

    /// Largest cross-track error over ticks at or after `from_t`.
    pub fn max_cross_track_after(&self, from_t: f64) -> f64 {
        self.ticks
            .iter()
            .filter(|t| t.t >= from_t)
            .flat_map(|t| t.cross_track.iter().flatten().copied())
            .fold(0.0, f64::max)
    }

    /// Smallest distance between any two vehicles over the run.
    pub fn min_pair_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for t in &self.ticks {
            for (i, a) in t.poses.iter().enumerate() {
                for b in &t.poses[i + 1..] {
                    best = best.min((a.x - b.x).hypot(a.y - b.y));
                }
            }
        }
        best
    }
}
