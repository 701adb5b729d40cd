//! Exact min-max-distance planning by iterative deepening on the per-robot
//! move bound, with A* over the joint space inside each bound.
//!
//! Joint steps are expanded one robot at a time (operator decomposition), so
//! the branching factor is at most seven per node rather than seven to the
//! number of robots. Within a bound the search minimizes `(total moves,
//! steps)` lexicographically using the sum and the max of single-robot hop
//! distances as heuristics.

use std::cmp::Reverse;
use std::collections::hash_map::Entry;
use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};

use super::{JointPlan, MultiRobotProblem, PlanError};

/// Default cap on node expansions across all bounds.
pub const DEFAULT_EXPANSION_BUDGET: usize = 4_000_000;

/// Upper size of the joint configuration space checked for reachability
/// before deepening.
const REACHABILITY_LIMIT: u64 = 300_000;

pub fn plan_min_max_dist(problem: &MultiRobotProblem) -> Result<JointPlan, PlanError> {
    plan_min_max_dist_with_budget(problem, DEFAULT_EXPANSION_BUDGET)
}

pub fn plan_min_max_dist_with_budget(problem: &MultiRobotProblem, budget: usize) -> Result<JointPlan, PlanError> {
    problem.validate()?;
    let n = problem.robots();
    let nv = problem.grid.len();
    if n == 0 {
        return Ok(JointPlan::from_steps(vec![Vec::new()]));
    }
    if n >= nv {
        return Err(PlanError::OverPacked { robots: n, vertices: nv });
    }
    let dist: Vec<Vec<u32>> = problem.goals.iter().map(|&g| problem.grid.hop_distances(g)).collect();
    if (0..n).any(|i| dist[i][problem.starts[i]] == u32::MAX) {
        return Err(PlanError::Infeasible);
    }
    if (nv as u64).checked_pow(n as u32).is_some_and(|s| s <= REACHABILITY_LIMIT) && !goals_reachable(problem) {
        return Err(PlanError::Infeasible);
    }

    let lower = (0..n).map(|i| dist[i][problem.starts[i]]).max().unwrap_or(0) as usize;
    let mut search = Search {
        problem,
        dist: &dist,
        budget,
        expanded: 0,
    };
    for bound in lower..=nv * n {
        if let Some(plan) = search.run(bound as u32)? {
            return Ok(plan);
        }
    }
    Err(PlanError::Infeasible)
}

struct Node {
    pos: Vec<u16>,
    next: Vec<u16>,
    moves: Vec<u16>,
    steps: u32,
    parent: usize,
}

impl Node {
    fn key(&self) -> Vec<u16> {
        let mut k = Vec::with_capacity(self.pos.len() * 2 + self.next.len() + 1);
        k.extend_from_slice(&self.pos);
        k.extend_from_slice(&self.next);
        k.push(self.next.len() as u16);
        k.extend_from_slice(&self.moves);
        k
    }

    fn total_moves(&self) -> u32 {
        self.moves.iter().map(|&m| u32::from(m)).sum()
    }
}

struct Search<'a> {
    problem: &'a MultiRobotProblem,
    dist: &'a [Vec<u32>],
    budget: usize,
    expanded: usize,
}

impl Search<'_> {
    fn heuristic(&self, node: &Node) -> (u32, u32) {
        let k = node.next.len();
        let mut sum = 0;
        let mut max_steps = 0;
        for i in 0..node.pos.len() {
            let (v, pending) = if i < k {
                (node.next[i], 0)
            } else {
                (node.pos[i], u32::from(k > 0))
            };
            let d = self.dist[i][v as usize];
            sum += d;
            max_steps = max_steps.max(d.saturating_sub(pending));
        }
        (sum, max_steps)
    }

    /// Best plan whose robots each make at most `bound` moves, if any.
    fn run(&mut self, bound: u32) -> Result<Option<JointPlan>, PlanError> {
        let n = self.problem.robots();
        let goals: Vec<u16> = self.problem.goals.iter().map(|&g| g as u16).collect();
        let mut nodes = vec![Node {
            pos: self.problem.starts.iter().map(|&s| s as u16).collect(),
            next: Vec::with_capacity(n),
            moves: vec![0; n],
            steps: 0,
            parent: usize::MAX,
        }];
        let mut best: HashMap<Vec<u16>, u32> = HashMap::new();
        best.insert(nodes[0].key(), 0);
        let mut heap = BinaryHeap::new();
        let (h1, h2) = self.heuristic(&nodes[0]);
        heap.push(Reverse((h1, h2, h1, 0usize)));

        while let Some(Reverse((_, _, _, idx))) = heap.pop() {
            let key = nodes[idx].key();
            if best.get(&key).is_some_and(|&s| s < nodes[idx].steps) {
                continue;
            }
            if nodes[idx].next.is_empty() && nodes[idx].pos == goals {
                return Ok(Some(self.reconstruct(&nodes, idx)));
            }
            self.expanded += 1;
            if self.expanded > self.budget {
                return Err(PlanError::BudgetExhausted(self.budget));
            }

            let k = nodes[idx].next.len();
            let here = nodes[idx].pos[k];
            let grid = &self.problem.grid;
            let options = std::iter::once(here as usize).chain(grid.neighbors(here as usize).iter().copied());
            for v in options {
                let node = &nodes[idx];
                let moved = v as u16 != here;
                let used = node.moves[k] + u16::from(moved);
                if u32::from(used) + self.dist[k][v] > bound {
                    continue;
                }
                let v16 = v as u16;
                let blocked = (0..k).any(|j| node.next[j] == v16 || (moved && node.next[j] == here && node.pos[j] == v16));
                if blocked {
                    continue;
                }
                let mut child = Node {
                    pos: node.pos.clone(),
                    next: node.next.clone(),
                    moves: node.moves.clone(),
                    steps: node.steps + u32::from(k == 0),
                    parent: idx,
                };
                child.moves[k] = used;
                child.next.push(v16);
                if child.next.len() == n {
                    child.pos = std::mem::take(&mut child.next);
                }
                let ckey = child.key();
                match best.entry(ckey) {
                    Entry::Occupied(mut e) => {
                        if *e.get() <= child.steps {
                            continue;
                        }
                        e.insert(child.steps);
                    }
                    Entry::Vacant(e) => {
                        e.insert(child.steps);
                    }
                }
                let (h1, h2) = self.heuristic(&child);
                let f1 = child.total_moves() + h1;
                let f2 = child.steps + h2;
                heap.push(Reverse((f1, f2, h1, nodes.len())));
                nodes.push(child);
            }
        }
        Ok(None)
    }

    fn reconstruct(&self, nodes: &[Node], goal: usize) -> JointPlan {
        let mut steps = Vec::new();
        let mut idx = goal;
        loop {
            let node = &nodes[idx];
            if node.next.is_empty() {
                steps.push(node.pos.iter().map(|&v| v as usize).collect());
            }
            if node.parent == usize::MAX {
                break;
            }
            idx = node.parent;
        }
        steps.reverse();
        JointPlan::from_steps(steps)
    }
}

/// Breadth-first reachability of the goal configuration, ignoring moves.
fn goals_reachable(problem: &MultiRobotProblem) -> bool {
    let n = problem.robots();
    let grid = &problem.grid;
    let start: Vec<u16> = problem.starts.iter().map(|&s| s as u16).collect();
    let goal: Vec<u16> = problem.goals.iter().map(|&g| g as u16).collect();
    // State: current configuration plus the partial next configuration.
    let mut seen: HashSet<(Vec<u16>, Vec<u16>)> = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert((start.clone(), Vec::new()));
    queue.push_back((start, Vec::new()));
    while let Some((pos, next)) = queue.pop_front() {
        if next.is_empty() && pos == goal {
            return true;
        }
        let k = next.len();
        let here = pos[k];
        for v in std::iter::once(here as usize).chain(grid.neighbors(here as usize).iter().copied()) {
            let v16 = v as u16;
            let moved = v16 != here;
            if (0..k).any(|j| next[j] == v16 || (moved && next[j] == here && pos[j] == v16)) {
                continue;
            }
            let mut nn = next.clone();
            nn.push(v16);
            let state = if nn.len() == n { (nn, Vec::new()) } else { (pos.clone(), nn) };
            if seen.insert(state.clone()) {
                queue.push_back(state);
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Vec2;
    use crate::planners::{validate_plan, HexGrid};

    #[test]
    fn single_robot_at_goal() {
        let g = HexGrid::hexagon(1, 1.0);
        let p = MultiRobotProblem::new(g, vec![3], vec![3]).unwrap();
        let plan = plan_min_max_dist(&p).unwrap();
        assert_eq!(plan.max_moves, 0);
        assert_eq!(plan.steps.len(), 1);
    }

    #[test]
    fn single_robot_takes_shortest_path() {
        let g = HexGrid::hexagon(2, 1.0);
        for goal in 0..g.len() {
            let d = g.hop_distances(0)[goal] as usize;
            let p = MultiRobotProblem::new(g.clone(), vec![0], vec![goal]).unwrap();
            let plan = plan_min_max_dist(&p).unwrap();
            assert_eq!(plan.max_moves, d);
            validate_plan(&p, &plan).unwrap();
        }
    }

    #[test]
    fn swap_without_siding_is_infeasible() {
        let g = HexGrid::from_points(vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0)], 1.0).unwrap();
        let p = MultiRobotProblem::new(g, vec![0], vec![1]).unwrap();
        assert_eq!(plan_min_max_dist(&p).unwrap().max_moves, 1);

        let g = HexGrid::from_points(vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(2.0, 0.0)], 1.0).unwrap();
        let p = MultiRobotProblem::new(g, vec![0, 2], vec![2, 0]).unwrap();
        assert_eq!(plan_min_max_dist(&p), Err(PlanError::Infeasible));
    }

    #[test]
    fn over_packed() {
        let g = HexGrid::from_points(vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0)], 1.0).unwrap();
        let p = MultiRobotProblem::new(g, vec![0, 1], vec![1, 0]).unwrap();
        assert!(matches!(plan_min_max_dist(&p), Err(PlanError::OverPacked { .. })));
    }

    #[test]
    fn rotation_around_a_triangle_is_allowed() {
        let g = HexGrid::hexagon(1, 1.0);
        // Center plus two adjacent petals form a triangle.
        let c = g.vertices().iter().position(|p| p.norm() < 1e-9).unwrap();
        let a = g.neighbors(c)[0];
        let b = *g.neighbors(c).iter().find(|&&v| g.neighbors(a).contains(&v)).unwrap();
        let p = MultiRobotProblem::new(g, vec![c, a, b], vec![a, b, c]).unwrap();
        let plan = plan_min_max_dist(&p).unwrap();
        assert_eq!(plan.max_moves, 1);
        assert_eq!(plan.steps.len(), 2);
        validate_plan(&p, &plan).unwrap();
    }

    #[test]
    fn deterministic() {
        let g = HexGrid::hexagon(2, 1.0);
        let p = MultiRobotProblem::new(g, vec![0, 5, 18], vec![18, 9, 0]).unwrap();
        assert_eq!(plan_min_max_dist(&p).unwrap(), plan_min_max_dist(&p).unwrap());
    }
}
