use serde::{Deserialize, Serialize};

use super::PursuitError;
use crate::math::Vec2;

/// Segments shorter than this are treated as zero length.
pub const MIN_SEGMENT: f64 = 1e-9;

/// A path vertex with its scheduled arrival time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

impl Waypoint {
    pub fn new(x: f64, y: f64, t: f64) -> Self {
        Self { x, y, t }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

/// Closest point of a path to a query position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    /// Index of the segment holding the closest point.
    pub segment: usize,
    /// Parameter along that segment in [0, 1].
    pub u: f64,
    pub point: Vec2,
    /// Arclength from the path start to `point`.
    pub arclength: f64,
    pub distance: f64,
}

/// Timestamped polyline shared by the planners and the follower.
///
/// Timestamps strictly increase. Paths built with [`TimedPath::new`] reject
/// consecutive duplicate points; [`TimedPath::with_holds`] accepts them as
/// schedule holds (the vehicle is meant to wait in place).
#[derive(Debug, Clone, PartialEq)]
pub struct TimedPath {
    waypoints: Vec<Waypoint>,
    cumulative: Vec<f64>,
}

impl TimedPath {
    pub fn new(waypoints: Vec<Waypoint>) -> Result<Self, PursuitError> {
        Self::build(waypoints, false)
    }

    pub fn with_holds(waypoints: Vec<Waypoint>) -> Result<Self, PursuitError> {
        Self::build(waypoints, true)
    }

    /// Timestamps a bare polyline at a constant nominal speed starting at `t0`.
    pub fn from_polyline(points: &[Vec2], nominal_speed: f64, t0: f64) -> Result<Self, PursuitError> {
        if !(nominal_speed.is_finite() && nominal_speed > 0.0) {
            return Err(PursuitError::InvalidConfig("nominal speed must be > 0"));
        }
        let mut t = t0;
        let mut waypoints = Vec::with_capacity(points.len());
        for (i, p) in points.iter().enumerate() {
            if i > 0 {
                t += p.distance(points[i - 1]) / nominal_speed;
            }
            waypoints.push(Waypoint::new(p.x, p.y, t));
        }
        Self::new(waypoints)
    }

    fn build(waypoints: Vec<Waypoint>, allow_holds: bool) -> Result<Self, PursuitError> {
        if waypoints.len() < 2 {
            return Err(PursuitError::TooFewWaypoints(waypoints.len()));
        }
        let mut cumulative = Vec::with_capacity(waypoints.len());
        cumulative.push(0.0);
        for i in 0..waypoints.len() {
            let w = waypoints[i];
            if !(w.x.is_finite() && w.y.is_finite() && w.t.is_finite()) {
                return Err(PursuitError::NonFinite(i));
            }
            if i == 0 {
                continue;
            }
            let prev = waypoints[i - 1];
            // Written so that a NaN-free but equal pair is rejected.
            if w.t <= prev.t {
                return Err(PursuitError::NonMonotoneTime(i));
            }
            let len = w.position().distance(prev.position());
            if len < MIN_SEGMENT && !allow_holds {
                return Err(PursuitError::DuplicatePoint(i));
            }
            cumulative.push(cumulative[i - 1] + len);
        }
        Ok(Self {
            waypoints,
            cumulative,
        })
    }

    pub fn waypoints(&self) -> &[Waypoint] {
        &self.waypoints
    }

    pub fn cumulative_lengths(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    pub fn segment_count(&self) -> usize {
        self.waypoints.len() - 1
    }

    pub fn point(&self, i: usize) -> Vec2 {
        self.waypoints[i].position()
    }

    pub fn total_length(&self) -> f64 {
        *self.cumulative.last().unwrap_or(&0.0)
    }

    pub fn start_time(&self) -> f64 {
        self.waypoints[0].t
    }

    pub fn end_time(&self) -> f64 {
        self.waypoints[self.waypoints.len() - 1].t
    }

    pub fn final_point(&self) -> Vec2 {
        self.point(self.waypoints.len() - 1)
    }

    /// Shifts every timestamp by `dt`.
    pub fn shifted(&self, dt: f64) -> TimedPath {
        let waypoints = self
            .waypoints
            .iter()
            .map(|w| Waypoint::new(w.x, w.y, w.t + dt))
            .collect();
        TimedPath {
            waypoints,
            cumulative: self.cumulative.clone(),
        }
    }

    /// Arclength the schedule calls for at time `now`, interpolated linearly
    /// between waypoint timestamps and clamped to the path's time span.
    pub fn scheduled_arclength(&self, now: f64) -> f64 {
        if now <= self.start_time() {
            return 0.0;
        }
        if now >= self.end_time() {
            return self.total_length();
        }
        // First waypoint strictly after `now`.
        let hi = self.waypoints.partition_point(|w| w.t <= now);
        let lo = hi - 1;
        let (t0, t1) = (self.waypoints[lo].t, self.waypoints[hi].t);
        let frac = (now - t0) / (t1 - t0);
        self.cumulative[lo] + frac * (self.cumulative[hi] - self.cumulative[lo])
    }

    /// Scheduled position at time `now`.
    pub fn scheduled_point(&self, now: f64) -> Vec2 {
        self.point_at_arclength(self.scheduled_arclength(now))
    }

    pub fn point_at_arclength(&self, s: f64) -> Vec2 {
        let s = s.clamp(0.0, self.total_length());
        let hi = self.cumulative.partition_point(|&c| c < s).max(1).min(self.len() - 1);
        let lo = hi - 1;
        let seg = self.cumulative[hi] - self.cumulative[lo];
        if seg < MIN_SEGMENT {
            return self.point(hi);
        }
        let frac = (s - self.cumulative[lo]) / seg;
        self.point(lo) + (self.point(hi) - self.point(lo)) * frac
    }

    fn project_onto_segment(&self, j: usize, p: Vec2) -> Projection {
        let a = self.point(j);
        let b = self.point(j + 1);
        let d = b - a;
        let len_sq = d.norm_sq();
        let u = if len_sq < MIN_SEGMENT * MIN_SEGMENT {
            0.0
        } else {
            ((p - a).dot(d) / len_sq).clamp(0.0, 1.0)
        };
        let point = a + d * u;
        Projection {
            segment: j,
            u,
            point,
            arclength: self.cumulative[j] + u * (self.cumulative[j + 1] - self.cumulative[j]),
            distance: p.distance(point),
        }
    }

    /// Closest point over the whole path; the earliest wins ties.
    pub fn project(&self, p: Vec2) -> Projection {
        self.project_range(p, 0, self.segment_count())
    }

    /// Closest point restricted to segments starting at `from_segment` and
    /// lying within `window` meters of arclength past that segment's start.
    /// The first two candidate segments are always searched.
    pub fn project_windowed(&self, p: Vec2, from_segment: usize, window: f64) -> Projection {
        let from = from_segment.min(self.segment_count() - 1);
        let limit = self.cumulative[from] + window;
        let mut end = from + 1;
        while end < self.segment_count() && (end <= from + 1 || self.cumulative[end] <= limit) {
            end += 1;
        }
        self.project_range(p, from, end)
    }

    fn project_range(&self, p: Vec2, from: usize, end: usize) -> Projection {
        let mut best = self.project_onto_segment(from, p);
        for j in from + 1..end {
            let cand = self.project_onto_segment(j, p);
            if cand.distance < best.distance {
                best = cand;
            }
        }
        best
    }

    /// Distance from `p` to the nearest point of the polyline.
    pub fn distance_to(&self, p: Vec2) -> f64 {
        self.project(p).distance
    }
}
