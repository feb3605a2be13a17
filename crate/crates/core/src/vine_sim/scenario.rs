//! Replayable scenario files.
//!
//! A scenario is a text file of JSON records, one per line, each tagged by
//! `kind`. Blank lines and lines starting with `#` are ignored.
//!
//! ```text
//! # wrap attempt on a small post
//! {"kind": "run", "duration": 120}
//! {"kind": "seed", "seed": 7}
//! {"kind": "sim", "initial_mode": "searching_left", "initial_length": 27.5}
//! {"kind": "controller", "contact_threshold": 1.01}
//! {"kind": "obstacle", "center": [17.5, 41.4], "radius": 8, "stiffness": 4}
//! {"kind": "touch", "t": 3.0, "pocket_id": "L0", "force": 3, "duration": 2}
//! {"kind": "touch", "t": 9.0, "position": [-7, 20], "force": 3, "duration": 2}
//! ```
//!
//! `sim` and `controller` records override only the fields they name.
//! Obstacles and touches accumulate; the other kinds may appear once.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::contact::{Obstacle, Touch, TouchTarget};
use super::SimConfig;
use crate::contact_controller::ControllerConfig;

pub const DEFAULT_DURATION_S: f64 = 60.0;
pub const MAX_TOUCH_FORCE_N: f64 = 50.0;
pub const MAX_TOUCH_DURATION_S: f64 = 60.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub duration: f64,
    pub seed: u64,
    pub sim: SimConfig,
    pub controller: ControllerConfig,
    pub obstacles: Vec<Obstacle>,
    pub touches: Vec<Touch>,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: "unnamed".into(),
            duration: DEFAULT_DURATION_S,
            seed: 0,
            sim: SimConfig::default(),
            controller: ControllerConfig::default(),
            obstacles: Vec::new(),
            touches: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioError {
    /// One-based; 0 when the error is not tied to a line.
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

impl std::error::Error for ScenarioError {}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Record {
    Run(RunRecord),
    Seed { seed: u64 },
    Sim(serde_json::Value),
    Controller(serde_json::Value),
    Obstacle(Obstacle),
    Touch(TouchRecord),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RunRecord {
    duration: f64,
    #[serde(default)]
    name: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TouchRecord {
    t: f64,
    #[serde(default)]
    position: Option<[f64; 2]>,
    #[serde(default)]
    pocket_id: Option<String>,
    force: f64,
    duration: f64,
}

/// Checks a hand-applied touch: force in [0, 50] N, duration in (0, 60] s.
pub fn validate_touch(force: f64, duration: f64) -> Result<(), String> {
    if !(0.0..=MAX_TOUCH_FORCE_N).contains(&force) {
        return Err(format!("force must be in [0, {MAX_TOUCH_FORCE_N}] N, got {force}"));
    }
    if !(duration > 0.0 && duration <= MAX_TOUCH_DURATION_S) {
        return Err(format!("duration must be in (0, {MAX_TOUCH_DURATION_S}] s, got {duration}"));
    }
    Ok(())
}

/// Overlays the fields present in `patch` onto `base`.
pub fn merge_fields<T>(base: &T, patch: serde_json::Value) -> Result<T, String>
where
    T: Serialize + for<'de> Deserialize<'de>,
{
    let serde_json::Value::Object(patch) = patch else {
        return Err("expected an object".into());
    };
    let mut merged = serde_json::to_value(base).map_err(|e| e.to_string())?;
    let fields = merged.as_object_mut().expect("config serializes to an object");
    for (k, v) in patch {
        if k == "kind" {
            continue;
        }
        if !fields.contains_key(&k) {
            return Err(format!("unknown field {k:?}"));
        }
        fields.insert(k, v);
    }
    serde_json::from_value(merged).map_err(|e| e.to_string())
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Scenario, ScenarioError> {
        let mut sc = Scenario::default();
        let mut seen = std::collections::HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let err = |message: String| ScenarioError { line, message };
            let record: Record = serde_json::from_str(trimmed).map_err(|e| err(e.to_string()))?;
            let kind = match &record {
                Record::Run(_) => "run",
                Record::Seed { .. } => "seed",
                Record::Sim(_) => "sim",
                Record::Controller(_) => "controller",
                Record::Obstacle(_) | Record::Touch(_) => "",
            };
            if !kind.is_empty() && !seen.insert(kind) {
                return Err(err(format!("duplicate {kind} record")));
            }
            match record {
                Record::Run(r) => {
                    if !(r.duration > 0.0 && r.duration.is_finite()) {
                        return Err(err(format!("duration must be positive, got {}", r.duration)));
                    }
                    sc.duration = r.duration;
                    if let Some(name) = r.name {
                        sc.name = name;
                    }
                }
                Record::Seed { seed } => sc.seed = seed,
                Record::Sim(v) => {
                    sc.sim = merge_fields(&sc.sim, v).map_err(err)?;
                    sc.sim.validate().map_err(err)?;
                }
                Record::Controller(v) => {
                    sc.controller = merge_fields(&sc.controller, v).map_err(err)?;
                    sc.controller.validate().map_err(err)?;
                }
                Record::Obstacle(ob) => {
                    ob.validate().map_err(err)?;
                    sc.obstacles.push(ob);
                }
                Record::Touch(t) => {
                    let target = match (t.position, t.pocket_id) {
                        (Some(p), None) => TouchTarget::Position(p),
                        (None, Some(id)) => TouchTarget::Pocket(id),
                        _ => return Err(err("touch needs exactly one of position or pocket_id".into())),
                    };
                    validate_touch(t.force, t.duration).map_err(err)?;
                    if !(t.t >= 0.0) {
                        return Err(err(format!("touch time must be >= 0, got {}", t.t)));
                    }
                    sc.touches.push(Touch {
                        target,
                        force: t.force,
                        duration: t.duration,
                        start: t.t,
                    });
                }
            }
        }
        Ok(sc)
    }

    /// Reads a scenario file; an unnamed scenario takes the file stem.
    pub fn load(path: &Path) -> Result<Scenario, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|e| ScenarioError {
            line: 0,
            message: format!("{}: {e}", path.display()),
        })?;
        let mut sc = Scenario::parse(&text)?;
        if sc.name == "unnamed" {
            if let Some(stem) = path.file_stem() {
                sc.name = stem.to_string_lossy().into_owned();
            }
        }
        Ok(sc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact_controller::Mode;

    #[test]
    fn parses_all_record_kinds() {
        let text = r#"
# comment
{"kind": "run", "duration": 90, "name": "demo"}
{"kind": "seed", "seed": 7}
{"kind": "sim", "initial_mode": "searching_left", "initial_length": 27.5}

{"kind": "controller", "search_timeout": 10}
{"kind": "obstacle", "center": [1, 2], "radius": 8, "stiffness": 4}
{"kind": "touch", "t": 3, "pocket_id": "L0", "force": 3, "duration": 2}
{"kind": "touch", "t": 4, "position": [-7, 20], "force": 3, "duration": 2}
"#;
        let sc = Scenario::parse(text).unwrap();
        assert_eq!(sc.name, "demo");
        assert_eq!(sc.duration, 90.0);
        assert_eq!(sc.seed, 7);
        assert_eq!(sc.sim.initial_mode, Mode::SearchingLeft);
        assert_eq!(sc.sim.initial_length, 27.5);
        assert_eq!(sc.sim.dt, 0.05);
        assert_eq!(sc.controller.search_timeout, 10.0);
        assert_eq!(sc.controller.grow_timeout, 12.0);
        assert_eq!(sc.obstacles.len(), 1);
        assert_eq!(sc.touches[0].target, TouchTarget::Pocket("L0".into()));
        assert_eq!(sc.touches[1].target, TouchTarget::Position([-7.0, 20.0]));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("{\"kind\": \"run\", \"duration\": 5}\n{\"kind\": \"bogus\"}", 2),
            ("\n\n{\"kind\": \"sim\", \"dt\": -1}", 3),
            ("{\"kind\": \"sim\", \"warp\": 9}", 1),
            ("# c\n{\"kind\": \"obstacle\", \"center\": [0,0], \"radius\": 0, \"stiffness\": 1}", 2),
            ("{\"kind\": \"touch\", \"t\": 1, \"force\": 1, \"duration\": 1}", 1),
            ("{\"kind\": \"touch\", \"t\": 1, \"pocket_id\": \"L0\", \"force\": -1, \"duration\": 1}", 1),
            ("{\"kind\": \"seed\", \"seed\": 1}\n{\"kind\": \"seed\", \"seed\": 2}", 2),
            ("{not json", 1),
        ];
        for (text, line) in cases {
            let e = Scenario::parse(text).unwrap_err();
            assert_eq!(e.line, line, "{text}: {e}");
            assert!(e.to_string().starts_with(&format!("line {line}:")));
        }
    }

    #[test]
    fn empty_text_gives_defaults() {
        assert_eq!(Scenario::parse("").unwrap(), Scenario::default());
    }

    #[test]
    fn touch_limits() {
        assert!(validate_touch(0.0, 0.1).is_ok());
        assert!(validate_touch(50.0, 60.0).is_ok());
        assert!(validate_touch(50.1, 1.0).is_err());
        assert!(validate_touch(1.0, 0.0).is_err());
        assert!(validate_touch(1.0, 60.5).is_err());
        assert!(validate_touch(f64::NAN, 1.0).is_err());
    }
}
