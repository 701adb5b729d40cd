use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::NetError;
use crate::math::normalize_angle;
use crate::vehicle::Pose2D;

/// One tag as seen by the tracker.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TagPose {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    pub th: f64,
}

impl TagPose {
    pub fn new(id: u32, pose: &Pose2D) -> Self {
        Self {
            id,
            x: pose.x,
            y: pose.y,
            th: pose.theta,
        }
    }

    pub fn pose(&self) -> Pose2D {
        Pose2D::new(self.x, self.y, self.th)
    }
}

/// Snapshot of all visible vehicles at one camera frame.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PoseFrame {
    pub t: f64,
    pub poses: Vec<TagPose>,
}

impl PoseFrame {
    /// Sorts by id and normalizes headings; rejects duplicate ids and
    /// non-finite numbers.
    pub fn new(t: f64, mut poses: Vec<TagPose>) -> Result<Self, NetError> {
        if !t.is_finite() {
            return Err(NetError::InvalidFrame("t must be finite".into()));
        }
        for p in &mut poses {
            if !(p.x.is_finite() && p.y.is_finite() && p.th.is_finite()) {
                return Err(NetError::InvalidFrame(format!("non-finite pose for id {}", p.id)));
            }
            p.th = normalize_angle(p.th);
        }
        poses.sort_by_key(|p| p.id);
        if let Some(w) = poses.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(NetError::DuplicateId(w[0].id));
        }
        Ok(Self { t, poses })
    }

    pub fn get(&self, id: u32) -> Option<&TagPose> {
        self.poses.iter().find(|p| p.id == id)
    }

    pub fn ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.poses.iter().map(|p| p.id)
    }

    /// Copy restricted to the given ids.
    pub fn subset(&self, ids: &[u32]) -> PoseFrame {
        PoseFrame {
            t: self.t,
            poses: self.poses.iter().filter(|p| ids.contains(&p.id)).copied().collect(),
        }
    }
}

/// One NDJSON line, poses in ascending id order, numbers in shortest
/// round-trip form.
pub fn encode_pose_frame(frame: &PoseFrame) -> String {
    let mut poses: Vec<&TagPose> = frame.poses.iter().collect();
    poses.sort_by_key(|p| p.id);
    let mut out = String::with_capacity(24 + poses.len() * 64);
    write!(out, "{{\"t\":{},\"poses\":[", frame.t).unwrap();
    for (i, p) in poses.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        write!(out, "{{\"id\":{},\"x\":{},\"y\":{},\"th\":{}}}", p.id, p.x, p.y, p.th).unwrap();
    }
    out.push_str("]}\n");
    out
}

fn parse_err(field: &str, reason: impl Into<String>) -> NetError {
    NetError::Parse {
        field: field.to_string(),
        reason: reason.into(),
    }
}

fn number(obj: &Value, field: &str) -> Result<f64, NetError> {
    match obj.get(field) {
        None => Err(parse_err(field, "missing")),
        Some(v) => v
            .as_f64()
            .filter(|x| x.is_finite())
            .ok_or_else(|| parse_err(field, "expected a finite number")),
    }
}

pub fn decode_pose_frame(line: &str) -> Result<PoseFrame, NetError> {
    let root: Value = serde_json::from_str(line.trim()).map_err(|e| parse_err("frame", e.to_string()))?;
    if !root.is_object() {
        return Err(parse_err("frame", "expected an object"));
    }
    let t = number(&root, "t")?;
    let list = root
        .get("poses")
        .ok_or_else(|| parse_err("poses", "missing"))?
        .as_array()
        .ok_or_else(|| parse_err("poses", "expected an array"))?;
    let mut seen = BTreeSet::new();
    let mut poses = Vec::with_capacity(list.len());
    for item in list {
        let id = item
            .get("id")
            .ok_or_else(|| parse_err("id", "missing"))?
            .as_u64()
            .and_then(|v| u32::try_from(v).ok())
            .ok_or_else(|| parse_err("id", "expected a non-negative integer"))?;
        if !seen.insert(id) {
            return Err(parse_err("id", format!("duplicate id {id}")));
        }
        poses.push(TagPose {
            id,
            x: number(item, "x")?,
            y: number(item, "y")?,
            th: number(item, "th")?,
        });
    }
    PoseFrame::new(t, poses)
}
