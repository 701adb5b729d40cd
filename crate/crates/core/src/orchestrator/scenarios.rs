// Initial placements and reference paths for each scenario.

use std::f64::consts::{FRAC_PI_2, TAU};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{OrchestratorError, ScenarioConfig, ScenarioKind};
use crate::math::{Arena, Vec2};
use crate::planners::{plan_min_max_dist_with_budget, plan_to_timed_paths, snap_to_grid, HexGrid, MultiRobotProblem};
use crate::pursuit::{TimedPath, Waypoint};
use crate::vehicle::Pose2D;

/// What a scenario starts with.
pub(crate) struct Setup {
    pub placements: Vec<Pose2D>,
    pub paths: Vec<Option<TimedPath>>,
    /// Final destinations for `rvo_swap`.
    pub goals: Vec<Vec2>,
    pub grid: Option<HexGrid>,
}

// Stream separation so scenario draws never depend on the sensor or link seed.
const SETUP_STREAM: u64 = 0x5ce7;

pub(crate) fn setup(cfg: &ScenarioConfig) -> Result<Setup, OrchestratorError> {
    let ctx = |e: String| OrchestratorError::Scenario {
        scenario: cfg.scenario.name(),
        message: e,
    };
    match cfg.scenario {
        ScenarioKind::SyncCircle => sync_circle(cfg).map_err(ctx),
        ScenarioKind::FollowDrawn => follow_drawn(cfg).map_err(ctx),
        ScenarioKind::MinmaxHex => minmax_hex(cfg).map_err(ctx),
        ScenarioKind::RvoSwap => rvo_swap(cfg).map_err(ctx),
    }
}

/// Waypoints every few degrees counterclockwise from `phase`, timed at the
/// configured speed.
pub(crate) fn circle_path(center: Vec2, radius: f64, phase: f64, laps: f64, speed: f64, spacing_deg: f64) -> Result<TimedPath, String> {
    let step = spacing_deg.to_radians();
    let total = laps * TAU;
    let n = (total / step).ceil() as usize;
    let wps = (0..=n)
        .map(|k| {
            let a = (k as f64 * step).min(total);
            let p = center + Vec2::new(radius * (phase + a).cos(), radius * (phase + a).sin());
            Waypoint::new(p.x, p.y, radius * a / speed)
        })
        .collect();
    TimedPath::new(wps).map_err(|e| e.to_string())
}

fn sync_circle(cfg: &ScenarioConfig) -> Result<Setup, String> {
    let c = cfg.circle;
    let center = cfg.arena.center();
    if !cfg.arena.contains_disc(center, c.radius + cfg.vehicle.body_radius) {
        return Err(format!("circle of radius {} does not fit the arena", c.radius));
    }
    let n = cfg.vehicle_count;
    let chord = 2.0 * c.radius * (std::f64::consts::PI / n as f64).sin();
    if n > 1 && chord <= 2.0 * cfg.vehicle.body_radius {
        return Err(format!("{n} vehicles do not fit on a circle of radius {}", c.radius));
    }
    let mut placements = Vec::with_capacity(n);
    let mut paths = Vec::with_capacity(n);
    for i in 0..n {
        let phase = TAU * i as f64 / n as f64;
        let p = center + Vec2::new(c.radius * phase.cos(), c.radius * phase.sin());
        placements.push(Pose2D::new(p.x, p.y, phase + FRAC_PI_2));
        paths.push(Some(circle_path(center, c.radius, phase, c.laps, c.nominal_speed, c.waypoint_spacing_deg)?));
    }
    Ok(Setup {
        placements,
        paths,
        goals: Vec::new(),
        grid: None,
    })
}

/// Rows of vehicles three body radii apart, centered in the arena.
pub(crate) fn default_layout(arena: &Arena, n: usize, body_radius: f64) -> Result<Vec<Pose2D>, String> {
    let gap = 3.0 * body_radius;
    let cols = ((arena.width - 2.0 * body_radius) / gap).floor() as usize + 1;
    let rows = n.div_ceil(cols.max(1));
    if cols == 0 || (rows as f64 - 1.0) * gap > arena.height - 2.0 * body_radius {
        return Err(format!("{n} vehicles do not fit the arena"));
    }
    let per_row = n.min(cols);
    let x0 = arena.width / 2.0 - (per_row as f64 - 1.0) * gap / 2.0;
    let y0 = arena.height / 2.0 - (rows as f64 - 1.0) * gap / 2.0;
    Ok((0..n)
        .map(|i| Pose2D::new(x0 + (i % cols) as f64 * gap, y0 + (i / cols) as f64 * gap, 0.0))
        .collect())
}

fn follow_drawn(cfg: &ScenarioConfig) -> Result<Setup, String> {
    let n = cfg.vehicle_count;
    if cfg.drawn_paths.len() > n {
        return Err(format!("{} drawn paths for {n} vehicles", cfg.drawn_paths.len()));
    }
    let mut placements = default_layout(&cfg.arena, n, cfg.vehicle.body_radius)?;
    let mut paths = vec![None; n];
    for (i, poly) in cfg.drawn_paths.iter().enumerate() {
        let pts: Vec<Vec2> = poly.iter().map(|&p| p.into()).collect();
        if pts.len() < 2 {
            return Err(format!("drawn path {i} needs at least 2 points"));
        }
        if let Some(p) = pts.iter().find(|p| !cfg.arena.contains(**p)) {
            return Err(format!("drawn path {i} leaves the arena at ({}, {})", p.x, p.y));
        }
        let path = TimedPath::from_polyline(&pts, cfg.drawn_speed, 0.0).map_err(|e| format!("drawn path {i}: {e}"))?;
        let d = pts[1] - pts[0];
        placements[i] = Pose2D::new(pts[0].x, pts[0].y, d.y.atan2(d.x));
        paths[i] = Some(path);
    }
    Ok(Setup {
        placements,
        paths,
        goals: Vec::new(),
        grid: None,
    })
}

fn minmax_hex(cfg: &ScenarioConfig) -> Result<Setup, String> {
    let grid = HexGrid::build(cfg.arena, &cfg.vehicle, cfg.planner.clearance_factor).map_err(|e| e.to_string())?;
    let n = cfg.vehicle_count;
    if n >= grid.len() {
        return Err(format!("{n} robots on a {}-vertex grid", grid.len()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ SETUP_STREAM);
    let mut all: Vec<usize> = (0..grid.len()).collect();
    all.shuffle(&mut rng);
    let start_vertices = all[..n].to_vec();
    let poses: Vec<Pose2D> = start_vertices
        .iter()
        .map(|&v| Pose2D::new(grid.vertex(v).x, grid.vertex(v).y, 0.0))
        .collect();
    let starts = snap_to_grid(&grid, &poses).map_err(|e| e.to_string())?;
    let goals = if cfg.planner.goals_at_starts {
        starts.clone()
    } else {
        all.shuffle(&mut rng);
        all[..n].to_vec()
    };
    let problem = MultiRobotProblem::new(grid.clone(), starts.clone(), goals).map_err(|e| e.to_string())?;
    let plan = plan_min_max_dist_with_budget(&problem, cfg.planner.expansion_budget).map_err(|e| e.to_string())?;
    let timed = plan_to_timed_paths(&plan, &grid, cfg.planner.nominal_speed).map_err(|e| e.to_string())?;
    // Face the first move so the vehicle does not have to turn on the spot.
    let placements = (0..n)
        .map(|i| {
            let route = plan.robot_path(i);
            let here = grid.vertex(starts[i]);
            let heading = route
                .iter()
                .find(|&&v| v != starts[i])
                .map_or(0.0, |&v| {
                    let d = grid.vertex(v) - here;
                    d.y.atan2(d.x)
                });
            Pose2D::new(here.x, here.y, heading)
        })
        .collect();
    Ok(Setup {
        placements,
        paths: timed.into_iter().map(Some).collect(),
        goals: Vec::new(),
        grid: Some(grid),
    })
}

fn rvo_swap(cfg: &ScenarioConfig) -> Result<Setup, String> {
    let n = cfg.vehicle_count;
    let r = cfg.swap.circle_radius;
    let center = cfg.arena.center();
    if !cfg.arena.contains_disc(center, r + cfg.vehicle.body_radius) {
        return Err(format!("swap circle of radius {r} does not fit the arena"));
    }
    let mut placements = Vec::with_capacity(n);
    let mut goals = Vec::with_capacity(n);
    for i in 0..n {
        let a = TAU * i as f64 / n as f64;
        let offset = Vec2::new(r * a.cos(), r * a.sin());
        let p = center + offset;
        let g = center - offset;
        placements.push(Pose2D::new(p.x, p.y, (g - p).y.atan2((g - p).x)));
        goals.push(g);
    }
    Ok(Setup {
        placements,
        paths: vec![None; n],
        goals,
        grid: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_path_timing() {
        let p = circle_path(Vec2::new(0.75, 0.45), 0.3, 0.0, 2.0, 0.15, 5.0).unwrap();
        assert_eq!(p.len(), 145);
        assert!((p.end_time() - 2.0 * TAU * 0.3 / 0.15).abs() < 1e-9);
        assert!((p.final_point() - Vec2::new(1.05, 0.45)).norm() < 1e-12);
    }

    #[test]
    fn layout_fits() {
        let arena = Arena::default();
        let poses = default_layout(&arena, 14, 0.047).unwrap();
        for (i, a) in poses.iter().enumerate() {
            assert!(arena.contains_disc(a.position(), 0.047));
            for b in &poses[i + 1..] {
                assert!(a.position().distance(b.position()) > 2.0 * 0.047);
            }
        }
        assert!(default_layout(&arena, 1000, 0.047).is_err());
    }
}
