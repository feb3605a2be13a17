//! Records exchanged with live clients, one JSON object per message.
//!
//! Client to server: `{"req", "kind", ...}` with `kind` one of `touch`,
//! `pause`, `resume`, `reset`, `config`. Server to client: snapshots,
//! `{"req", "ack", "tick"}`, `{"req", "error", "detail"}`, a `{"session"}`
//! record on connect and after every reset, and `{"lagged"}` when a slow
//! viewer skipped snapshots.

use serde::Serialize;
use serde_json::{Map, Value};

use pocketvine::vine_sim::scenario::{validate_touch, Scenario};
use pocketvine::vine_sim::TouchTarget;

pub const MALFORMED: &str = "MALFORMED_COMMAND";
pub const INVALID: &str = "INVALID_COMMAND";
pub const NOT_OWNER: &str = "NOT_OWNER";

#[derive(Debug, Clone, PartialEq)]
pub enum CommandKind {
    Touch { target: TouchTarget, force: f64, duration: f64 },
    Pause,
    Resume,
    Reset,
    /// Controller fields to overwrite.
    Config(Map<String, Value>),
}

impl CommandKind {
    pub fn name(&self) -> &'static str {
        match self {
            CommandKind::Touch { .. } => "touch",
            CommandKind::Pause => "pause",
            CommandKind::Resume => "resume",
            CommandKind::Reset => "reset",
            CommandKind::Config(_) => "config",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Command {
    /// Client-chosen request id, echoed back verbatim.
    pub req: Value,
    pub kind: CommandKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorRecord {
    pub req: Value,
    pub error: &'static str,
    pub detail: String,
}

impl ErrorRecord {
    pub fn new(req: Value, error: &'static str, detail: impl Into<String>) -> Self {
        Self { req, error, detail: detail.into() }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("error record serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AckRecord {
    pub req: Value,
    pub ack: &'static str,
    /// Ticks completed when the command took effect.
    pub tick: u64,
}

impl AckRecord {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("ack serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionInfo {
    pub scenario: String,
    /// Increments on every reset.
    pub epoch: u64,
    pub dt: f64,
    pub body_half_width: f64,
    pub pocket_length: f64,
    pub obstacles: Vec<pocketvine::vine_sim::Obstacle>,
}

impl SessionInfo {
    pub fn new(scenario: &Scenario, epoch: u64) -> Self {
        Self {
            scenario: scenario.name.clone(),
            epoch,
            dt: scenario.sim.dt,
            body_half_width: scenario.sim.main_tube_lay_flat / std::f64::consts::PI,
            pocket_length: scenario.sim.pocket_length,
            obstacles: scenario.obstacles.clone(),
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(&serde_json::json!({ "session": self })).expect("session serializes")
    }
}

fn number(obj: &Map<String, Value>, key: &str) -> Result<f64, String> {
    match obj.get(key) {
        Some(v) => v.as_f64().ok_or_else(|| format!("{key} must be a number")),
        None => Err(format!("missing {key}")),
    }
}

/// Parses one client message. Errors come back as ready-to-send records.
pub fn parse_command(text: &str) -> Result<Command, ErrorRecord> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| ErrorRecord::new(Value::Null, MALFORMED, e.to_string()))?;
    let Value::Object(mut obj) = value else {
        return Err(ErrorRecord::new(Value::Null, MALFORMED, "expected a JSON object"));
    };
    let req = obj.remove("req").unwrap_or(Value::Null);
    let malformed = |detail: String| ErrorRecord::new(req.clone(), MALFORMED, detail);
    let kind = match obj.remove("kind") {
        Some(Value::String(k)) => k,
        Some(_) => return Err(malformed("kind must be a string".into())),
        None => return Err(malformed("missing kind".into())),
    };
    let kind = match kind.as_str() {
        "touch" => {
            let force = number(&obj, "force").map_err(&malformed)?;
            let duration = number(&obj, "duration").map_err(&malformed)?;
            let target = match (obj.get("position"), obj.get("pocket_id")) {
                (Some(p), None) => {
                    let xy: [f64; 2] = serde_json::from_value(p.clone())
                        .map_err(|_| malformed("position must be [x, y]".into()))?;
                    TouchTarget::Position(xy)
                }
                (None, Some(Value::String(id))) => TouchTarget::Pocket(id.clone()),
                (None, Some(_)) => return Err(malformed("pocket_id must be a string".into())),
                _ => return Err(malformed("touch needs exactly one of position or pocket_id".into())),
            };
            validate_touch(force, duration).map_err(|d| ErrorRecord::new(req.clone(), INVALID, d))?;
            CommandKind::Touch { target, force, duration }
        }
        "pause" => CommandKind::Pause,
        "resume" => CommandKind::Resume,
        "reset" => CommandKind::Reset,
        "config" => CommandKind::Config(obj),
        other => return Err(malformed(format!("unknown kind {other:?}"))),
    };
    Ok(Command { req, kind })
}
