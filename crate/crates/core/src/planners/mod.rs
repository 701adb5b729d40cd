//! Multi-robot planning on a hexagonal roadmap.
//!
//! Robots are fully distinguishable and move synchronously: at each step
//! every robot either stays or crosses one edge. Two robots may never occupy
//! the same vertex, and two robots may not swap along one edge in a single
//! step. Robots following one another, including rotations around a cycle,
//! are allowed.
//!
//! [`plan_min_max_dist`] minimizes the largest number of moves made by any
//! single robot, then the total number of moves, then the number of steps.
//! [`brute_force_plan`] is a small exhaustive search used to check it.

mod brute;
mod hexgrid;
mod minmax;
mod records;

pub use brute::brute_force_plan;
pub use hexgrid::{build_hex_grid, snap_to_grid, HexGrid};
pub use minmax::{plan_min_max_dist, plan_min_max_dist_with_budget, DEFAULT_EXPANSION_BUDGET};
pub use records::{plan_from_ndjson, plan_to_ndjson, PlanRecord};

use thiserror::Error;

use crate::pursuit::{PursuitError, TimedPath, Waypoint};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("workspace too small: fewer than 2 grid vertices fit")]
    WorkspaceTooSmall,
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("over-packed: {robots} robots on {vertices} vertices")]
    OverPacked { robots: usize, vertices: usize },
    #[error("infeasible: no collision-free plan reaches the goals")]
    Infeasible,
    #[error("instance too large for exhaustive search ({robots} robots, {vertices} vertices)")]
    TooLarge { robots: usize, vertices: usize },
    #[error("search budget of {0} expansions exhausted")]
    BudgetExhausted(usize),
    #[error("poses {0} and {1} are closer than half an edge")]
    IllPosedSnap(usize, usize),
    #[error("plan record: {0}")]
    Record(String),
    #[error(transparent)]
    Path(#[from] PursuitError),
}

/// Starts and goals for labeled robots on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiRobotProblem {
    pub grid: HexGrid,
    pub starts: Vec<usize>,
    pub goals: Vec<usize>,
}

impl MultiRobotProblem {
    pub fn new(grid: HexGrid, starts: Vec<usize>, goals: Vec<usize>) -> Result<Self, PlanError> {
        let p = Self { grid, starts, goals };
        p.validate()?;
        Ok(p)
    }

    pub fn robots(&self) -> usize {
        self.starts.len()
    }

    pub fn validate(&self) -> Result<(), PlanError> {
        if self.starts.len() != self.goals.len() {
            return Err(PlanError::InvalidProblem(format!(
                "{} starts but {} goals",
                self.starts.len(),
                self.goals.len()
            )));
        }
        for (what, list) in [("start", &self.starts), ("goal", &self.goals)] {
            for (i, &v) in list.iter().enumerate() {
                if v >= self.grid.len() {
                    return Err(PlanError::InvalidProblem(format!("{what} of robot {i} is not a vertex")));
                }
                if list[..i].contains(&v) {
                    return Err(PlanError::InvalidProblem(format!("{what} vertex {v} used twice")));
                }
            }
        }
        Ok(())
    }
}

/// Synchronized vertex schedule: `steps[k][i]` is robot `i`'s vertex at step `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointPlan {
    pub steps: Vec<Vec<usize>>,
    /// Largest per-robot count of non-stay transitions.
    pub max_moves: usize,
}

impl JointPlan {
    pub fn from_steps(steps: Vec<Vec<usize>>) -> Self {
        let max_moves = per_robot_moves(&steps).into_iter().max().unwrap_or(0);
        Self { steps, max_moves }
    }

    pub fn robot_moves(&self) -> Vec<usize> {
        per_robot_moves(&self.steps)
    }

    pub fn total_moves(&self) -> usize {
        self.robot_moves().iter().sum()
    }

    /// Vertex sequence of one robot.
    pub fn robot_path(&self, robot: usize) -> Vec<usize> {
        self.steps.iter().map(|s| s[robot]).collect()
    }
}

fn per_robot_moves(steps: &[Vec<usize>]) -> Vec<usize> {
    let n = steps.first().map_or(0, Vec::len);
    let mut moves = vec![0; n];
    for w in steps.windows(2) {
        for i in 0..n {
            if w[0][i] != w[1][i] {
                moves[i] += 1;
            }
        }
    }
    moves
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanViolation {
    #[error("plan has no steps")]
    Empty,
    #[error("step {0} has the wrong number of robots")]
    Arity(usize),
    #[error("plan does not start at the start configuration")]
    WrongStart,
    #[error("plan does not end at the goal configuration")]
    WrongGoal,
    #[error("robots {a} and {b} share vertex {vertex} at step {step}")]
    Meet { step: usize, a: usize, b: usize, vertex: usize },
    #[error("robots {a} and {b} swap along an edge between steps {step} and {}", step + 1)]
    Swap { step: usize, a: usize, b: usize },
    #[error("robot {robot} jumps between non-adjacent vertices after step {step}")]
    Jump { step: usize, robot: usize },
    #[error("max_moves is {claimed} but the plan needs {actual}")]
    MaxMoves { claimed: usize, actual: usize },
}

/// Checks every joint-plan rule against `problem`.
pub fn validate_plan(problem: &MultiRobotProblem, plan: &JointPlan) -> Result<(), PlanViolation> {
    let n = problem.robots();
    let first = plan.steps.first().ok_or(PlanViolation::Empty)?;
    for (k, s) in plan.steps.iter().enumerate() {
        if s.len() != n {
            return Err(PlanViolation::Arity(k));
        }
    }
    if *first != problem.starts {
        return Err(PlanViolation::WrongStart);
    }
    if *plan.steps.last().unwrap() != problem.goals {
        return Err(PlanViolation::WrongGoal);
    }
    for (k, s) in plan.steps.iter().enumerate() {
        for a in 0..n {
            for b in a + 1..n {
                if s[a] == s[b] {
                    return Err(PlanViolation::Meet {
                        step: k,
                        a,
                        b,
                        vertex: s[a],
                    });
                }
            }
        }
    }
    for (k, w) in plan.steps.windows(2).enumerate() {
        let (cur, next) = (&w[0], &w[1]);
        for i in 0..n {
            if cur[i] != next[i] && !problem.grid.neighbors(cur[i]).contains(&next[i]) {
                return Err(PlanViolation::Jump { step: k, robot: i });
            }
            for j in i + 1..n {
                if cur[i] != next[i] && cur[i] == next[j] && cur[j] == next[i] {
                    return Err(PlanViolation::Swap { step: k, a: i, b: j });
                }
            }
        }
    }
    let actual = per_robot_moves(&plan.steps).into_iter().max().unwrap_or(0);
    if actual != plan.max_moves {
        return Err(PlanViolation::MaxMoves {
            claimed: plan.max_moves,
            actual,
        });
    }
    Ok(())
}

/// Turns a joint plan into one timed path per robot. Step `k` is scheduled at
/// `k * edge_length / nominal_speed` for every robot; staying robots get
/// repeated coordinates (schedule holds). A single-step plan yields a
/// two-waypoint hold.
pub fn plan_to_timed_paths(plan: &JointPlan, grid: &HexGrid, nominal_speed: f64) -> Result<Vec<TimedPath>, PlanError> {
    if !(nominal_speed.is_finite() && nominal_speed > 0.0) {
        return Err(PlanError::InvalidProblem("nominal_speed must be > 0".into()));
    }
    let n = plan.steps.first().map_or(0, Vec::len);
    let step_time = grid.edge_length() / nominal_speed;
    let count = plan.steps.len().max(2);
    (0..n)
        .map(|i| {
            let wps = (0..count)
                .map(|k| {
                    let v = plan.steps[k.min(plan.steps.len() - 1)][i];
                    let p = grid.vertex(v);
                    Waypoint::new(p.x, p.y, k as f64 * step_time)
                })
                .collect();
            TimedPath::with_holds(wps).map_err(PlanError::from)
        })
        .collect()
}
