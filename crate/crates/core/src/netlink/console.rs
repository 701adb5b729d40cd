use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::math::{Arena, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    DrawPath,
    SetGoal,
    StartScenario,
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    pub x: f64,
    pub y: f64,
}

impl From<PathPoint> for Vec2 {
    fn from(p: PathPoint) -> Vec2 {
        Vec2::new(p.x, p.y)
    }
}

/// Operator command as sent by the web console.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsoleCommand {
    pub kind: CommandKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vehicle_id: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub waypoints: Option<Vec<PathPoint>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Value>,
}

impl ConsoleCommand {
    pub fn parse(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("malformed command: {e}"))
    }

    /// Checks the shape of the command against the arena and the known
    /// vehicles. The error is the rejection reason shown to the operator.
    pub fn validate(&self, arena: &Arena, known_ids: &[u32]) -> Result<(), String> {
        let need_vehicle = || match self.vehicle_id {
            None => Err("vehicle_id required".to_string()),
            Some(id) if !known_ids.contains(&id) => Err("unknown id".to_string()),
            Some(_) => Ok(()),
        };
        let points = self.waypoints.as_deref().unwrap_or(&[]);
        let inside = || {
            if points.iter().all(|p| p.x.is_finite() && p.y.is_finite() && arena.contains(Vec2::new(p.x, p.y))) {
                Ok(())
            } else {
                Err("waypoint outside arena".to_string())
            }
        };
        match self.kind {
            CommandKind::DrawPath => {
                need_vehicle()?;
                if points.len() < 2 {
                    return Err("draw_path needs at least 2 waypoints".into());
                }
                inside()
            }
            CommandKind::SetGoal => {
                need_vehicle()?;
                if points.is_empty() {
                    return Err("set_goal needs a waypoint".into());
                }
                inside()
            }
            CommandKind::StartScenario => match &self.scenario {
                Some(_) => Ok(()),
                None => Err("scenario required".into()),
            },
            CommandKind::Stop => Ok(()),
        }
    }
}

/// Server reply to one [`ConsoleCommand`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ack {
    pub kind: String,
    pub command: Option<CommandKind>,
    pub accepted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    /// Roadmap vertices for grid scenarios, so the console can draw them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<[f64; 2]>>,
}

impl Ack {
    pub fn accepted(command: CommandKind) -> Self {
        Self {
            kind: "ack".into(),
            command: Some(command),
            accepted: true,
            reason: None,
            grid: None,
        }
    }

    pub fn rejected(command: Option<CommandKind>, reason: impl Into<String>) -> Self {
        Self {
            kind: "ack".into(),
            command,
            accepted: false,
            reason: Some(reason.into()),
            grid: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("ack serializes")
    }
}
