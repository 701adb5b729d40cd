use std::collections::VecDeque;

use super::PlanError;
use crate::math::{Arena, Vec2};
use crate::vehicle::{Pose2D, VehicleParams};

const SQRT3_2: f64 = 0.866_025_403_784_438_6;

/// Triangular lattice roadmap: every interior vertex has six neighbors at
/// distance `edge_length`.
#[derive(Debug, Clone, PartialEq)]
pub struct HexGrid {
    vertices: Vec<Vec2>,
    adjacency: Vec<Vec<usize>>,
    edge_length: f64,
}

impl HexGrid {
    /// Crops a triangular lattice with spacing `clearance_factor * body_radius`
    /// to the arena, keeping `body_radius` clear of every wall. Rows start at
    /// the lower-left corner; odd rows are shifted right by half an edge.
    /// Vertices are numbered row-major from the bottom.
    pub fn build(arena: Arena, params: &VehicleParams, clearance_factor: f64) -> Result<Self, PlanError> {
        if !(arena.width > 0.0 && arena.height > 0.0) {
            return Err(PlanError::InvalidProblem("workspace must have positive area".into()));
        }
        if !(clearance_factor >= 2.0) {
            return Err(PlanError::InvalidProblem("clearance_factor must be >= 2".into()));
        }
        let margin = params.body_radius;
        let e = clearance_factor * params.body_radius;
        let usable_w = arena.width - 2.0 * margin;
        let usable_h = arena.height - 2.0 * margin;
        let fit = |span: f64, step: f64| -> usize {
            if span < 0.0 {
                0
            } else {
                (span / step + 1e-9).floor() as usize + 1
            }
        };
        let rows = fit(usable_h, e * SQRT3_2);
        let row_cols = |r: usize| {
            if r.is_multiple_of(2) {
                fit(usable_w, e)
            } else {
                fit(usable_w - e / 2.0, e)
            }
        };

        let mut vertices = Vec::new();
        let mut row_start = Vec::with_capacity(rows);
        for r in 0..rows {
            row_start.push(vertices.len());
            let offset = if r % 2 == 0 { 0.0 } else { e / 2.0 };
            for c in 0..row_cols(r) {
                vertices.push(Vec2::new(margin + offset + c as f64 * e, margin + r as f64 * e * SQRT3_2));
            }
        }
        if vertices.len() < 2 {
            return Err(PlanError::WorkspaceTooSmall);
        }

        let index = |r: isize, c: isize| -> Option<usize> {
            if r < 0 || c < 0 || r as usize >= rows || c as usize >= row_cols(r as usize) {
                None
            } else {
                Some(row_start[r as usize] + c as usize)
            }
        };
        let mut adjacency = vec![Vec::new(); vertices.len()];
        for r in 0..rows as isize {
            for c in 0..row_cols(r as usize) as isize {
                // Diagonal neighbors sit at columns (c-1, c) from an even row
                // and (c, c+1) from an odd row.
                let shift = if r % 2 == 0 { -1 } else { 0 };
                let cands = [
                    (r, c - 1),
                    (r, c + 1),
                    (r - 1, c + shift),
                    (r - 1, c + shift + 1),
                    (r + 1, c + shift),
                    (r + 1, c + shift + 1),
                ];
                let me = index(r, c).expect("in range");
                let mut ns: Vec<usize> = cands.iter().filter_map(|&(rr, cc)| index(rr, cc)).collect();
                ns.sort_unstable();
                adjacency[me] = ns;
            }
        }
        Ok(Self {
            vertices,
            adjacency,
            edge_length: e,
        })
    }

    /// Builds a grid from explicit points, connecting pairs whose distance
    /// matches `edge_length` within 1e-9 relative tolerance.
    pub fn from_points(points: Vec<Vec2>, edge_length: f64) -> Result<Self, PlanError> {
        if !(edge_length > 0.0) {
            return Err(PlanError::InvalidProblem("edge_length must be > 0".into()));
        }
        if points.len() < 2 {
            return Err(PlanError::WorkspaceTooSmall);
        }
        let n = points.len();
        let mut adjacency = vec![Vec::new(); n];
        for i in 0..n {
            for j in i + 1..n {
                let d = points[i].distance(points[j]);
                if (d - edge_length).abs() <= 1e-9 * edge_length {
                    adjacency[i].push(j);
                    adjacency[j].push(i);
                }
            }
        }
        for ns in &mut adjacency {
            ns.sort_unstable();
        }
        Ok(Self {
            vertices: points,
            adjacency,
            edge_length,
        })
    }

    /// Hexagon-shaped patch with `rings` rings around a center vertex at the
    /// origin: 1, 7, 19, 37, ... vertices.
    pub fn hexagon(rings: usize, edge_length: f64) -> Self {
        let r = rings as i64;
        let mut pts = Vec::new();
        // Axial coordinates (q, s) with |q|, |s|, |q+s| <= rings.
        for s in -r..=r {
            for q in -r..=r {
                if (q + s).abs() <= r {
                    let x = edge_length * (q as f64 + s as f64 / 2.0);
                    let y = edge_length * SQRT3_2 * s as f64;
                    pts.push(Vec2::new(x, y));
                }
            }
        }
        if pts.len() < 2 {
            // A zero-ring patch still needs a neighbor to be a valid roadmap.
            pts.push(Vec2::new(edge_length, 0.0));
        }
        Self::from_points(pts, edge_length).expect("lattice points are valid")
    }

    /// Keeps only the listed vertices (in the given order), dropping edges to
    /// removed ones.
    pub fn induced(&self, keep: &[usize]) -> Result<Self, PlanError> {
        let pts = keep.iter().map(|&i| self.vertices[i]).collect();
        Self::from_points(pts, self.edge_length)
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> Vec2 {
        self.vertices[i]
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edge_length(&self) -> f64 {
        self.edge_length
    }

    /// Undirected edges as `(low, high)` index pairs.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, ns) in self.adjacency.iter().enumerate() {
            out.extend(ns.iter().filter(|&&j| j > i).map(|&j| (i, j)));
        }
        out
    }

    /// Hop distance from `source` to every vertex (`u32::MAX` if unreachable).
    pub fn hop_distances(&self, source: usize) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.len()];
        let mut queue = VecDeque::new();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(v) = queue.pop_front() {
            for &w in &self.adjacency[v] {
                if dist[w] == u32::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.hop_distances(0).iter().all(|&d| d != u32::MAX)
    }

    /// Assigns each pose a distinct vertex. Candidate `(pose, vertex)` pairs
    /// are taken in increasing distance; ties go to the lower vehicle index,
    /// then the lower vertex index.
    pub fn snap(&self, poses: &[Pose2D]) -> Result<Vec<usize>, PlanError> {
        if poses.len() > self.len() {
            return Err(PlanError::OverPacked {
                robots: poses.len(),
                vertices: self.len(),
            });
        }
        for i in 0..poses.len() {
            for j in i + 1..poses.len() {
                if poses[i].position().distance(poses[j].position()) < self.edge_length / 2.0 {
                    return Err(PlanError::IllPosedSnap(i, j));
                }
            }
        }
        let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(poses.len() * self.len());
        for (k, pose) in poses.iter().enumerate() {
            for (v, p) in self.vertices.iter().enumerate() {
                pairs.push((pose.position().distance(*p), k, v));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut assigned = vec![usize::MAX; poses.len()];
        let mut taken = vec![false; self.len()];
        let mut remaining = poses.len();
        for (_, k, v) in pairs {
            if remaining == 0 {
                break;
            }
            if assigned[k] == usize::MAX && !taken[v] {
                assigned[k] = v;
                taken[v] = true;
                remaining -= 1;
            }
        }
        Ok(assigned)
    }
}

/// Binds live vehicle poses to distinct grid vertices.
pub fn snap_to_grid(grid: &HexGrid, poses: &[Pose2D]) -> Result<Vec<usize>, PlanError> {
    grid.snap(poses)
}

/// See [`HexGrid::build`].
pub fn build_hex_grid(arena: Arena, params: &VehicleParams, clearance_factor: f64) -> Result<HexGrid, PlanError> {
    HexGrid::build(arena, params, clearance_factor)
}
