//! Scenario playback: run a world to the scenario end, writing one snapshot
//! per tick and a record per state transition.

use std::io::Write;
use std::time::{Duration, Instant};

use serde::Serialize;

use pocketvine::contact_controller::{Mode, Trigger};
use pocketvine::vine_sim::scenario::Scenario;
use pocketvine::vine_sim::{TickReport, World};

use crate::snapshot::SessionSnapshot;

#[derive(Debug, Clone, Copy, Default)]
pub struct DemoOptions {
    /// Simulated seconds per wall second; `None` runs as fast as possible.
    pub speed: Option<f64>,
}

/// A state change, as printed by the demo.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transition {
    pub t: f64,
    pub from: Mode,
    pub to: Mode,
    pub trigger: Option<Trigger>,
}

impl Transition {
    fn from_report(r: &TickReport) -> Option<Self> {
        (r.state.mode != r.previous).then_some(Self {
            t: r.time,
            from: r.previous,
            to: r.state.mode,
            trigger: r.trigger,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemoSummary {
    pub scenario: String,
    pub seed: u64,
    pub ticks: u64,
    pub sim_time: f64,
    pub wall_seconds: f64,
    pub final_state: Mode,
    /// Printed one per line as they happen.
    #[serde(skip)]
    pub transitions: Vec<Transition>,
}

/// Plays `scenario` to its duration. Snapshots go to `trace`, transitions to
/// `on_transition` as they happen.
pub fn run<W: Write>(
    scenario: Scenario,
    opts: DemoOptions,
    trace: &mut W,
    mut on_transition: impl FnMut(&Transition),
) -> anyhow::Result<DemoSummary> {
    if let Some(s) = opts.speed {
        anyhow::ensure!(s.is_finite() && s > 0.0, "speed must be positive, got {s}");
    }
    let name = scenario.name.clone();
    let seed = scenario.seed;
    let duration = scenario.duration;
    let mut world = World::new(scenario).map_err(anyhow::Error::msg)?;
    let dt = world.config().dt;
    let start = Instant::now();
    let mut transitions = Vec::new();
    while world.time() < duration {
        let report = world.tick();
        if let Some(tr) = Transition::from_report(&report) {
            on_transition(&tr);
            transitions.push(tr);
        }
        writeln!(trace, "{}", SessionSnapshot::capture(&world).to_line())?;
        if let Some(speed) = opts.speed {
            let deadline = start + Duration::from_secs_f64(world.ticks() as f64 * dt / speed);
            let now = Instant::now();
            if deadline > now {
                std::thread::sleep(deadline - now);
            }
        }
    }
    trace.flush()?;
    Ok(DemoSummary {
        scenario: name,
        seed,
        ticks: world.ticks(),
        sim_time: world.time(),
        wall_seconds: start.elapsed().as_secs_f64(),
        final_state: world.controller().mode,
        transitions,
    })
}
