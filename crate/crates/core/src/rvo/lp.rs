// Incremental 2D linear programming over ORCA half-planes, following the
// randomized-incremental scheme of the RVO2 library (without the shuffle, so
// results are deterministic).

use super::HalfPlane;
use crate::math::Vec2;

const EPSILON: f64 = 1e-12;

// Internal line form: permitted side is to the left of `dir`.
#[derive(Debug, Clone, Copy)]
struct Line {
    point: Vec2,
    dir: Vec2,
}

impl From<&HalfPlane> for Line {
    fn from(h: &HalfPlane) -> Self {
        Line {
            point: h.point,
            dir: Vec2::new(h.normal.y, -h.normal.x),
        }
    }
}

/// Closest velocity to `pref` inside every half-plane and the `max_speed`
/// disc. When the constraints cannot all hold, returns the velocity inside
/// the disc that minimizes the largest violation.
pub fn solve_velocity(halfplanes: &[HalfPlane], pref: Vec2, max_speed: f64) -> Vec2 {
    solve_velocity_checked(halfplanes, pref, max_speed).0
}

/// As [`solve_velocity`], also reporting whether the constraints were
/// feasible.
pub fn solve_velocity_checked(halfplanes: &[HalfPlane], pref: Vec2, max_speed: f64) -> (Vec2, bool) {
    let lines: Vec<Line> = halfplanes.iter().map(Line::from).collect();
    let mut result = Vec2::ZERO;
    let fail = program2(&lines, max_speed, pref, false, &mut result);
    if fail < lines.len() {
        program3(&lines, fail, max_speed, &mut result);
        (result, false)
    } else {
        (result, true)
    }
}

// Optimizes along line `idx` subject to lines before it and the disc.
fn program1(lines: &[Line], idx: usize, radius: f64, opt: Vec2, direction_opt: bool, result: &mut Vec2) -> bool {
    let line = lines[idx];
    let dot = line.point.dot(line.dir);
    let disc = dot * dot + radius * radius - line.point.norm_sq();
    if disc < 0.0 {
        return false;
    }
    let root = disc.sqrt();
    let mut t_left = -dot - root;
    let mut t_right = -dot + root;

    for other in &lines[..idx] {
        let denom = line.dir.cross(other.dir);
        let numer = other.dir.cross(line.point - other.point);
        if denom.abs() <= EPSILON {
            if numer < 0.0 {
                return false;
            }
            continue;
        }
        let t = numer / denom;
        if denom >= 0.0 {
            t_right = t_right.min(t);
        } else {
            t_left = t_left.max(t);
        }
        if t_left > t_right {
            return false;
        }
    }

    *result = if direction_opt {
        if opt.dot(line.dir) > 0.0 {
            line.point + line.dir * t_right
        } else {
            line.point + line.dir * t_left
        }
    } else {
        let t = line.dir.dot(opt - line.point).clamp(t_left, t_right);
        line.point + line.dir * t
    };
    true
}

// Returns the index of the first line that made the program infeasible, or
// `lines.len()` on success.
fn program2(lines: &[Line], radius: f64, opt: Vec2, direction_opt: bool, result: &mut Vec2) -> usize {
    *result = if direction_opt {
        opt * radius
    } else {
        opt.clamp_norm(radius)
    };
    for i in 0..lines.len() {
        if lines[i].dir.cross(lines[i].point - *result) > 0.0 {
            let saved = *result;
            if !program1(lines, i, radius, opt, direction_opt, result) {
                *result = saved;
                return i;
            }
        }
    }
    lines.len()
}

// Minimizes the largest violation over lines from `begin` on.
fn program3(lines: &[Line], begin: usize, radius: f64, result: &mut Vec2) {
    let mut distance = 0.0;
    for i in begin..lines.len() {
        if lines[i].dir.cross(lines[i].point - *result) <= distance {
            continue;
        }
        let mut projected = Vec::with_capacity(i);
        for j in 0..i {
            let det = lines[i].dir.cross(lines[j].dir);
            let point = if det.abs() <= EPSILON {
                if lines[i].dir.dot(lines[j].dir) > 0.0 {
                    continue;
                }
                (lines[i].point + lines[j].point) * 0.5
            } else {
                lines[i].point + lines[i].dir * (lines[j].dir.cross(lines[i].point - lines[j].point) / det)
            };
            projected.push(Line {
                point,
                dir: (lines[j].dir - lines[i].dir).normalized(),
            });
        }
        let saved = *result;
        let outward = Vec2::new(-lines[i].dir.y, lines[i].dir.x);
        if program2(&projected, radius, outward, true, result) < projected.len() {
            *result = saved;
        }
        distance = lines[i].dir.cross(lines[i].point - *result);
    }
}
