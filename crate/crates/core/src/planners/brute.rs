//! Exhaustive reference planner for tiny instances.
//!
//! Uniform-cost search on the bottleneck objective (largest per-robot move
//! count so far) over every joint transition, without heuristics. A state is
//! discarded only when another state at the same configuration has
//! componentwise no more moves, which cannot lose an optimal plan.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use super::{JointPlan, MultiRobotProblem, PlanError};

pub const MAX_ROBOTS: usize = 3;
pub const MAX_VERTICES: usize = 19;

struct Entry {
    pos: Vec<usize>,
    moves: Vec<usize>,
    parent: Option<usize>,
    alive: bool,
}

pub fn brute_force_plan(problem: &MultiRobotProblem) -> Result<JointPlan, PlanError> {
    problem.validate()?;
    let n = problem.robots();
    let nv = problem.grid.len();
    if n > MAX_ROBOTS || nv > MAX_VERTICES {
        return Err(PlanError::TooLarge { robots: n, vertices: nv });
    }
    if n >= nv {
        return Err(PlanError::OverPacked { robots: n, vertices: nv });
    }

    let mut entries = vec![Entry {
        pos: problem.starts.clone(),
        moves: vec![0; n],
        parent: None,
        alive: true,
    }];
    // Pareto front of move vectors per configuration, as entry indices.
    let mut front: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
    front.insert(problem.starts.clone(), vec![0]);
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((0usize, 0usize)));

    while let Some(Reverse((_, idx))) = heap.pop() {
        if !entries[idx].alive {
            continue;
        }
        if entries[idx].pos == problem.goals {
            return Ok(reconstruct(&entries, idx));
        }
        for next in joint_successors(problem, &entries[idx].pos) {
            let moves: Vec<usize> = entries[idx]
                .moves
                .iter()
                .zip(entries[idx].pos.iter().zip(&next))
                .map(|(&m, (a, b))| m + usize::from(a != b))
                .collect();
            let list = front.entry(next.clone()).or_default();
            if list.iter().any(|&e| dominates(&entries[e].moves, &moves)) {
                continue;
            }
            list.retain(|&e| {
                let beaten = dominates(&moves, &entries[e].moves);
                if beaten {
                    entries[e].alive = false;
                }
                !beaten
            });
            let cost = *moves.iter().max().unwrap_or(&0);
            let id = entries.len();
            list.push(id);
            entries.push(Entry {
                pos: next,
                moves,
                parent: Some(idx),
                alive: true,
            });
            heap.push(Reverse((cost, id)));
        }
    }
    Err(PlanError::Infeasible)
}

fn dominates(a: &[usize], b: &[usize]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

/// Every collision-free joint configuration reachable in one step.
fn joint_successors(problem: &MultiRobotProblem, pos: &[usize]) -> Vec<Vec<usize>> {
    let options: Vec<Vec<usize>> = pos
        .iter()
        .map(|&v| {
            let mut o = vec![v];
            o.extend_from_slice(problem.grid.neighbors(v));
            o
        })
        .collect();
    let mut out = Vec::new();
    let mut cur = vec![0; pos.len()];
    product(&options, 0, &mut cur, &mut out);
    out.retain(|next| {
        for i in 0..next.len() {
            for j in i + 1..next.len() {
                if next[i] == next[j] {
                    return false;
                }
                if pos[i] != next[i] && pos[i] == next[j] && pos[j] == next[i] {
                    return false;
                }
            }
        }
        true
    });
    out
}

fn product(options: &[Vec<usize>], i: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if i == options.len() {
        out.push(cur.clone());
        return;
    }
    for &v in &options[i] {
        cur[i] = v;
        product(options, i + 1, cur, out);
    }
}

fn reconstruct(entries: &[Entry], mut idx: usize) -> JointPlan {
    let mut steps = vec![entries[idx].pos.clone()];
    while let Some(p) = entries[idx].parent {
        steps.push(entries[p].pos.clone());
        idx = p;
    }
    steps.reverse();
    JointPlan::from_steps(steps)
}
