//! Five-state contact search: grow straight, sweep left, sweep right, and
//! grow toward whichever side reports contact.
//!
//! Transitions fire on three kinds of event only: the front sensor on the
//! steered side reaching the contact threshold, a growth timeout (one pocket
//! length grown), or a search timeout.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    GrowingStraight,
    SearchingLeft,
    SearchingRight,
    GrowingLeft,
    GrowingRight,
}

impl Mode {
    pub const ALL: [Mode; 5] = [
        Mode::GrowingStraight,
        Mode::SearchingLeft,
        Mode::SearchingRight,
        Mode::GrowingLeft,
        Mode::GrowingRight,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mode::GrowingStraight => "growing_straight",
            Mode::SearchingLeft => "searching_left",
            Mode::SearchingRight => "searching_right",
            Mode::GrowingLeft => "growing_left",
            Mode::GrowingRight => "growing_right",
        }
    }

    pub fn is_growing(self) -> bool {
        matches!(
            self,
            Mode::GrowingStraight | Mode::GrowingLeft | Mode::GrowingRight
        )
    }

    pub fn is_searching(self) -> bool {
        matches!(self, Mode::SearchingLeft | Mode::SearchingRight)
    }

    /// Side the actuators bend toward in this mode.
    pub fn steer_side(self) -> Option<Side> {
        match self {
            Mode::SearchingLeft | Mode::GrowingLeft => Some(Side::Left),
            Mode::SearchingRight | Mode::GrowingRight => Some(Side::Right),
            Mode::GrowingStraight => None,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown controller state {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerState {
    pub mode: Mode,
    pub entered_at: f64,
    /// Side of the contact that drove the current or most recent growth
    /// episode, cleared when the search gives up.
    pub prior_contact_side: Option<Side>,
}

impl ControllerState {
    pub fn new(mode: Mode, now: f64) -> Self {
        let prior_contact_side = match mode {
            Mode::GrowingLeft => Some(Side::Left),
            Mode::GrowingRight => Some(Side::Right),
            _ => None,
        };
        Self {
            mode,
            entered_at: now,
            prior_contact_side,
        }
    }

    fn enter(mode: Mode, now: f64, prior: Option<Side>) -> Self {
        Self {
            mode,
            entered_at: now,
            prior_contact_side: prior,
        }
    }
}

impl Default for ControllerState {
    fn default() -> Self {
        Self::new(Mode::GrowingStraight, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ControllerConfig {
    /// Seconds of growth per growing state, one pocket length.
    pub grow_timeout: f64,
    pub search_timeout: f64,
    /// Gauge pressure on the front sensor that counts as contact, kPa.
    pub contact_threshold: f64,
    /// Actuator set-point used while steering.
    pub steer_pressure: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            grow_timeout: 12.0,
            search_timeout: 15.0,
            contact_threshold: 1.01,
            steer_pressure: 1.0,
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<(), String> {
        let fields = [
            ("grow_timeout", self.grow_timeout),
            ("search_timeout", self.search_timeout),
            ("contact_threshold", self.contact_threshold),
            ("steer_pressure", self.steer_pressure),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ActuatorCommand {
    pub grow: bool,
    pub left_pressure: f64,
    pub right_pressure: f64,
}

impl ActuatorCommand {
    pub fn for_mode(mode: Mode, cfg: &ControllerConfig) -> Self {
        let (left_pressure, right_pressure) = match mode.steer_side() {
            Some(Side::Left) => (cfg.steer_pressure, 0.0),
            Some(Side::Right) => (0.0, cfg.steer_pressure),
            None => (0.0, 0.0),
        };
        Self {
            grow: mode.is_growing(),
            left_pressure,
            right_pressure,
        }
    }
}

/// What caused a transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trigger {
    Contact,
    GrowthTimeout,
    SearchTimeout,
}

/// Advances the state machine by one evaluation. `front_left` and
/// `front_right` are gauge pressures of the front sensor on each side.
pub fn step(
    state: ControllerState,
    front_left: f64,
    front_right: f64,
    now: f64,
    cfg: &ControllerConfig,
) -> (ControllerState, ActuatorCommand) {
    let (next, _) = step_traced(state, front_left, front_right, now, cfg);
    (next, ActuatorCommand::for_mode(next.mode, cfg))
}

/// Like [`step`], also reporting the trigger when a transition happened.
pub fn step_traced(
    state: ControllerState,
    front_left: f64,
    front_right: f64,
    now: f64,
    cfg: &ControllerConfig,
) -> (ControllerState, Option<Trigger>) {
    let elapsed = now - state.entered_at;
    let touching = |p: f64| p >= cfg.contact_threshold;
    let go = |mode, prior| ControllerState::enter(mode, now, prior);
    match state.mode {
        Mode::GrowingStraight if elapsed >= cfg.grow_timeout => (
            go(Mode::SearchingLeft, None),
            Some(Trigger::GrowthTimeout),
        ),
        Mode::SearchingLeft if touching(front_left) => (
            go(Mode::GrowingLeft, Some(Side::Left)),
            Some(Trigger::Contact),
        ),
        Mode::SearchingLeft if elapsed >= cfg.search_timeout => {
            // after a left wrap attempt the sweep gives up instead of
            // trying the right side
            if state.prior_contact_side == Some(Side::Left) {
                (go(Mode::GrowingStraight, None), Some(Trigger::SearchTimeout))
            } else {
                (go(Mode::SearchingRight, None), Some(Trigger::SearchTimeout))
            }
        }
        Mode::SearchingRight if touching(front_right) => (
            go(Mode::GrowingRight, Some(Side::Right)),
            Some(Trigger::Contact),
        ),
        Mode::SearchingRight if elapsed >= cfg.search_timeout => {
            (go(Mode::GrowingStraight, None), Some(Trigger::SearchTimeout))
        }
        Mode::GrowingLeft if elapsed >= cfg.grow_timeout => (
            go(Mode::SearchingLeft, Some(Side::Left)),
            Some(Trigger::GrowthTimeout),
        ),
        Mode::GrowingRight if elapsed >= cfg.grow_timeout => (
            go(Mode::SearchingRight, Some(Side::Right)),
            Some(Trigger::GrowthTimeout),
        ),
        _ => (state, None),
    }
}

/// Front-sensor readings sampled at a fixed interval, starting in `initial`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceScript {
    pub dt: f64,
    pub initial: Mode,
    /// `(front_left, front_right)` per sample.
    pub samples: Vec<(f64, f64)>,
}

impl TraceScript {
    pub fn new(dt: f64, initial: Mode) -> Self {
        Self {
            dt,
            initial,
            samples: Vec::new(),
        }
    }

    /// Appends `seconds` worth of constant readings.
    pub fn hold(mut self, seconds: f64, front_left: f64, front_right: f64) -> Self {
        let n = (seconds / self.dt).round() as usize;
        self.samples
            .extend(std::iter::repeat_n((front_left, front_right), n));
        self
    }

    pub fn time_of(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }
}

/// Runs the controller over a script; one `(time, state)` entry per sample.
pub fn run_trace(script: &TraceScript, cfg: &ControllerConfig) -> Vec<(f64, ControllerState)> {
    let mut state = ControllerState::new(script.initial, 0.0);
    script
        .samples
        .iter()
        .enumerate()
        .map(|(k, &(l, r))| {
            let now = script.time_of(k);
            state = step(state, l, r, now, cfg).0;
            (now, state)
        })
        .collect()
}

/// Collapses a trace into its sequence of visited modes.
pub fn episodes(trace: &[(f64, ControllerState)]) -> Vec<Mode> {
    let mut out: Vec<Mode> = Vec::new();
    let mut last_entry = f64::NAN;
    for (_, s) in trace {
        if out.last() != Some(&s.mode) || s.entered_at != last_entry {
            out.push(s.mode);
            last_entry = s.entered_at;
        }
    }
    out
}
