//! NDJSON records for problems and plans (record/replay and the `plan-hex`
//! utility). One `grid` line, one `robot` line per robot, then optionally one
//! `route` line per robot and a closing `plan` summary.

use serde::{Deserialize, Serialize};

use super::{HexGrid, JointPlan, MultiRobotProblem, PlanError};
use crate::math::Vec2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlanRecord {
    Grid {
        edge_length: f64,
        vertices: Vec<[f64; 2]>,
    },
    Robot {
        id: usize,
        start: usize,
        goal: usize,
        start_xy: [f64; 2],
        goal_xy: [f64; 2],
    },
    Route {
        id: usize,
        vertices: Vec<usize>,
        coords: Vec<[f64; 2]>,
    },
    Plan {
        robots: usize,
        steps: usize,
        max_moves: usize,
        total_moves: usize,
    },
}

fn xy(p: Vec2) -> [f64; 2] {
    [p.x, p.y]
}

/// Serializes the problem and, when given, its plan.
pub fn plan_to_ndjson(problem: &MultiRobotProblem, plan: Option<&JointPlan>) -> String {
    let grid = &problem.grid;
    let mut records = vec![PlanRecord::Grid {
        edge_length: grid.edge_length(),
        vertices: grid.vertices().iter().map(|&p| xy(p)).collect(),
    }];
    for (id, (&start, &goal)) in problem.starts.iter().zip(&problem.goals).enumerate() {
        records.push(PlanRecord::Robot {
            id,
            start,
            goal,
            start_xy: xy(grid.vertex(start)),
            goal_xy: xy(grid.vertex(goal)),
        });
    }
    if let Some(plan) = plan {
        for id in 0..problem.robots() {
            let vertices = plan.robot_path(id);
            let coords = vertices.iter().map(|&v| xy(grid.vertex(v))).collect();
            records.push(PlanRecord::Route { id, vertices, coords });
        }
        records.push(PlanRecord::Plan {
            robots: problem.robots(),
            steps: plan.steps.len(),
            max_moves: plan.max_moves,
            total_moves: plan.total_moves(),
        });
    }
    let mut out = String::new();
    for r in &records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

/// Parses the output of [`plan_to_ndjson`]. The plan is `None` when no route
/// lines are present.
pub fn plan_from_ndjson(text: &str) -> Result<(MultiRobotProblem, Option<JointPlan>), PlanError> {
    let mut grid = None;
    let mut robots: Vec<(usize, usize, usize)> = Vec::new();
    let mut routes: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut summary = None;
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: PlanRecord =
            serde_json::from_str(line).map_err(|e| PlanError::Record(format!("line {}: {e}", lineno + 1)))?;
        match rec {
            PlanRecord::Grid { edge_length, vertices } => {
                let pts = vertices.iter().map(|p| Vec2::new(p[0], p[1])).collect();
                grid = Some(HexGrid::from_points(pts, edge_length)?);
            }
            PlanRecord::Robot { id, start, goal, .. } => robots.push((id, start, goal)),
            PlanRecord::Route { id, vertices, .. } => routes.push((id, vertices)),
            PlanRecord::Plan { max_moves, .. } => summary = Some(max_moves),
        }
    }
    let grid = grid.ok_or_else(|| PlanError::Record("missing grid record".into()))?;
    robots.sort_by_key(|r| r.0);
    if robots.iter().enumerate().any(|(i, r)| r.0 != i) {
        return Err(PlanError::Record("robot ids must be 0..n".into()));
    }
    let problem = MultiRobotProblem::new(
        grid,
        robots.iter().map(|r| r.1).collect(),
        robots.iter().map(|r| r.2).collect(),
    )?;
    if routes.is_empty() {
        return Ok((problem, None));
    }
    routes.sort_by_key(|r| r.0);
    if routes.len() != problem.robots() || routes.iter().enumerate().any(|(i, r)| r.0 != i) {
        return Err(PlanError::Record("one route per robot required".into()));
    }
    let len = routes[0].1.len();
    if routes.iter().any(|r| r.1.len() != len) {
        return Err(PlanError::Record("routes differ in length".into()));
    }
    let steps = (0..len).map(|k| routes.iter().map(|r| r.1[k]).collect()).collect();
    let plan = JointPlan::from_steps(steps);
    if summary.is_some_and(|m| m != plan.max_moves) {
        return Err(PlanError::Record("summary max_moves disagrees with routes".into()));
    }
    Ok((problem, Some(plan)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Arena;
    use crate::planners::plan_min_max_dist;
    use crate::vehicle::VehicleParams;

    #[test]
    fn roundtrip_with_plan() {
        let grid = HexGrid::build(Arena::new(0.6, 0.5), &VehicleParams::default(), 3.0).unwrap();
        let n = grid.len();
        let problem = MultiRobotProblem::new(grid, vec![0, n - 1], vec![n - 1, 0]).unwrap();
        let plan = plan_min_max_dist(&problem).unwrap();
        let text = plan_to_ndjson(&problem, Some(&plan));
        let (p2, plan2) = plan_from_ndjson(&text).unwrap();
        assert_eq!(p2, problem);
        assert_eq!(plan2.unwrap(), plan);
    }

    #[test]
    fn problem_only() {
        let grid = HexGrid::hexagon(1, 0.14);
        let problem = MultiRobotProblem::new(grid, vec![0], vec![6]).unwrap();
        let text = plan_to_ndjson(&problem, None);
        assert_eq!(text.lines().count(), 2);
        let (p2, plan) = plan_from_ndjson(&text).unwrap();
        assert_eq!(p2, problem);
        assert!(plan.is_none());
        assert!(plan_from_ndjson("{\"kind\":\"robot\"}").is_err());
    }
}
