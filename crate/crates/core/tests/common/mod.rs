// Brute-force oracles shared by the integration test targets.
#![allow(dead_code)]

use micromvp::rvo::HalfPlane;
use micromvp::Vec2;
use rand::Rng;

/// Grid sampling of the speed disc: the admissible sample closest to `pref`.
/// Returns the sample and the grid pitch.
pub fn lp_by_sampling(halfplanes: &[HalfPlane], pref: Vec2, max_speed: f64, samples: usize) -> (Option<Vec2>, f64) {
    let pitch = (std::f64::consts::PI * max_speed * max_speed / samples as f64).sqrt();
    let n = (max_speed / pitch).ceil() as i64;
    let mut best: Option<(f64, Vec2)> = None;
    for i in -n..=n {
        let x = i as f64 * pitch;
        for j in -n..=n {
            let y = j as f64 * pitch;
            if x * x + y * y > max_speed * max_speed {
                continue;
            }
            let inside = halfplanes
                .iter()
                .all(|h| (x - h.point.x) * h.normal.x + (y - h.point.y) * h.normal.y >= 0.0);
            if !inside {
                continue;
            }
            let d = (x - pref.x).powi(2) + (y - pref.y).powi(2);
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, Vec2::new(x, y)));
            }
        }
    }
    (best.map(|b| b.1), pitch)
}

/// A random LP that has a feasible point well inside the speed disc.
pub fn random_feasible_lp<R: Rng>(rng: &mut R) -> (Vec<HalfPlane>, Vec2, f64) {
    let max_speed = rng.gen_range(0.05..0.5);
    let anchor = Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)).clamp_norm(0.7) * max_speed;
    let count = rng.gen_range(1..=8);
    let planes = (0..count)
        .map(|_| {
            let a: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let n = Vec2::new(a.cos(), a.sin());
            let slack = rng.gen_range(0.0..0.6) * max_speed;
            HalfPlane::new(anchor - n * slack, n).unwrap()
        })
        .collect();
    let pref = Vec2::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)) * max_speed;
    (planes, pref, max_speed)
}

/// True when relative velocity `v` leads to contact within `tau`, that is
/// when `|v t - p| < r` for some `t` in `(0, tau]`.
pub fn in_velocity_obstacle(v: Vec2, p: Vec2, r: f64, tau: f64) -> bool {
    let vv = v.dot(v);
    let t = if vv == 0.0 { tau } else { (v.dot(p) / vv).clamp(1e-12, tau) };
    (v * t - p).norm() < r
}

/// Shortest displacement taking `v` to the velocity obstacle's boundary,
/// found by marching rays in many directions and bisecting the first
/// crossing.
pub fn vo_boundary_displacement(v: Vec2, p: Vec2, r: f64, tau: f64) -> Vec2 {
    let start = in_velocity_obstacle(v, p, r, tau);
    let reach = 2.0 * (v.norm() + p.norm() / tau + r / tau);
    let step = reach / 20_000.0;
    let crossing = |d: Vec2| -> Option<f64> {
        let mut s = 0.0;
        while s < reach {
            let next = s + step;
            if in_velocity_obstacle(v + d * next, p, r, tau) != start {
                let (mut lo, mut hi) = (s, next);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if in_velocity_obstacle(v + d * mid, p, r, tau) != start {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                return Some(hi);
            }
            s = next;
        }
        None
    };
    let dir = |a: f64| Vec2::new(a.cos(), a.sin());
    let coarse = 720;
    let mut best = (f64::INFINITY, 0.0);
    for k in 0..coarse {
        let a = std::f64::consts::TAU * k as f64 / coarse as f64;
        if let Some(s) = crossing(dir(a)) {
            if s < best.0 {
                best = (s, a);
            }
        }
    }
    // Golden-section refinement of the direction around the coarse best.
    let width = std::f64::consts::TAU / coarse as f64;
    let (mut lo, mut hi) = (best.1 - width, best.1 + width);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let f = |a: f64| crossing(dir(a)).unwrap_or(f64::INFINITY);
    for _ in 0..60 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if f(a) < f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let a = 0.5 * (lo + hi);
    dir(a) * f(a)
}

/// A random LP whose minimizer is sharp, so that a sampled argmin pins it
/// down to the grid pitch. Half the instances have a feasible `pref`; the
/// rest have two constraints meeting at the optimum with `pref` strictly
/// inside their normal cone. Returns the planes, `pref`, the speed limit and
/// the minimizer known from the construction.
pub fn random_sharp_lp<R: Rng>(rng: &mut R) -> (Vec<HalfPlane>, Vec2, f64, Vec2) {
    let max_speed = rng.gen_range(0.05..0.5);
    let dir = |a: f64| Vec2::new(a.cos(), a.sin());
    let mut planes = Vec::new();
    let (pref, optimum) = if rng.gen_bool(0.5) {
        let pref = Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)).clamp_norm(0.8) * max_speed;
        (pref, pref)
    } else {
        let v = Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)).clamp_norm(0.7) * max_speed;
        let a: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let spread = rng.gen_range(75f64..105.0).to_radians() * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let (n1, n2) = (dir(a), dir(a + spread));
        planes.push(HalfPlane::new(v, n1).unwrap());
        planes.push(HalfPlane::new(v, n2).unwrap());
        let pref = v - (n1 * rng.gen_range(0.7..1.0) + n2 * rng.gen_range(0.7..1.0)) * max_speed;
        (pref, v)
    };
    for _ in 0..rng.gen_range(0..=5) {
        let n = dir(rng.gen_range(0.0..std::f64::consts::TAU));
        let slack = rng.gen_range(0.05..0.6) * max_speed;
        planes.push(HalfPlane::new(optimum - n * slack, n).unwrap());
    }
    (planes, pref, max_speed, optimum)
}

/// A labeled planning instance on a random induced subgraph of the 19-vertex
/// hexagon, with 1 to 3 robots. May be infeasible.
pub fn random_planning_instance<R: Rng>(rng: &mut R) -> micromvp::planners::MultiRobotProblem {
    use micromvp::planners::{HexGrid, MultiRobotProblem};
    use rand::seq::SliceRandom;
    let full = HexGrid::hexagon(2, 0.141);
    let mut keep: Vec<usize> = (0..full.len()).collect();
    keep.shuffle(rng);
    keep.truncate(rng.gen_range(7..=full.len()));
    keep.sort_unstable();
    let grid = full.induced(&keep).unwrap();
    let robots = rng.gen_range(1..=3);
    let mut vs: Vec<usize> = (0..grid.len()).collect();
    vs.shuffle(rng);
    let starts = vs[..robots].to_vec();
    vs.shuffle(rng);
    let goals = vs[..robots].to_vec();
    MultiRobotProblem::new(grid, starts, goals).unwrap()
}
