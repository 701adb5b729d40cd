//! Library side of the `mvp` binary: batch runs, replay, the planner
//! utility, and the live service the web console attaches to.

pub mod serve;
pub mod settings;

use std::path::Path;
use std::time::{Duration, Instant};

use anyhow::Context;
use micromvp::orchestrator::{replay, run_scenario_with, ReplayReport, RunLog, ScenarioConfig};
use micromvp::planners::{build_hex_grid, plan_min_max_dist, plan_to_ndjson, MultiRobotProblem, PlanError};
use micromvp::VehicleParams;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use settings::Settings;

/// Runs a scenario in simulated time. With `real_time` each tick is held
/// until its wall-clock slot; the log is the same either way.
pub fn run(cfg: &ScenarioConfig, real_time: bool) -> anyhow::Result<RunLog> {
    let started = Instant::now();
    let dt = cfg.tick_dt();
    let log = run_scenario_with(cfg, |rec| {
        if real_time {
            let due = started + Duration::from_secs_f64((rec.tick + 1) as f64 * dt);
            if let Some(wait) = due.checked_duration_since(Instant::now()) {
                std::thread::sleep(wait);
            }
        }
    })?;
    Ok(log)
}

pub fn write_log(log: &RunLog, path: &Path) -> anyhow::Result<()> {
    std::fs::write(path, log.to_ndjson()).with_context(|| format!("writing {}", path.display()))
}

pub fn replay_file(path: &Path) -> anyhow::Result<ReplayReport> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let log = RunLog::from_ndjson(&text)?;
    Ok(replay(&log)?)
}

/// One-line JSON summary of a run for the terminal.
pub fn summarize(log: &RunLog) -> String {
    let min_pair = log.min_pair_distance();
    serde_json::json!({
        "scenario": log.header.config.scenario,
        "seed": log.header.seed,
        "complete": log.summary.complete,
        "reason": log.summary.reason,
        "ticks": log.summary.ticks,
        "max_cross_track": log.max_cross_track_after(0.0),
        "max_schedule_skew": log.max_schedule_skew(),
        "min_pair_distance": if min_pair.is_finite() { Some(min_pair) } else { None },
    })
    .to_string()
}

/// Random distinct starts and goals on the workspace's hex grid, planned
/// with min-max distance. Returns the problem/plan records and whether a
/// plan was found.
pub fn plan_hex(arena: micromvp::math::Arena, robots: usize, seed: u64) -> anyhow::Result<(String, bool)> {
    let grid = build_hex_grid(arena, &VehicleParams::default(), 3.0)?;
    if robots == 0 || robots > grid.len() {
        anyhow::bail!("{robots} robots on a {}-vertex grid", grid.len());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vs: Vec<usize> = (0..grid.len()).collect();
    vs.shuffle(&mut rng);
    let starts = vs[..robots].to_vec();
    vs.shuffle(&mut rng);
    let goals = vs[..robots].to_vec();
    let problem = MultiRobotProblem::new(grid, starts, goals)?;
    match plan_min_max_dist(&problem) {
        Ok(plan) => Ok((plan_to_ndjson(&problem, Some(&plan)), true)),
        Err(e @ (PlanError::Infeasible | PlanError::BudgetExhausted(_))) => {
            log::warn!("no plan: {e}");
            Ok((plan_to_ndjson(&problem, None), false))
        }
        Err(e) => Err(e.into()),
    }
}
