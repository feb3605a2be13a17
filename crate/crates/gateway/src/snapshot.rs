use serde::{Deserialize, Serialize};

use pocketvine::vine_sim::World;

/// Spacing of body polyline samples, cm.
pub const BODY_SAMPLE_CM: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PocketView {
    pub pocket_id: String,
    pub side: String,
    pub exposed_fraction: f64,
    pub gauge_pressure: f64,
    pub estimated_force: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Actuators {
    pub left: f64,
    pub right: f64,
    pub grow: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Counters {
    /// Ticks completed.
    pub tick: u64,
    /// Hub poll cycles.
    pub frames: u64,
    /// Hub frames lost to a full buffer.
    pub dropped: u64,
}

/// Full world state after a tick, as sent to viewers and written to traces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSnapshot {
    /// Simulated time, s.
    pub t: f64,
    pub state: String,
    /// Centerline from base to tip, cm.
    pub body: Vec<[f64; 2]>,
    pub pockets: Vec<PocketView>,
    pub actuators: Actuators,
    pub counters: Counters,
}

impl SessionSnapshot {
    pub fn capture(world: &World) -> Self {
        let cmd = world.command();
        Self {
            t: world.time(),
            state: world.controller().mode.name().to_string(),
            body: world.body().polyline(BODY_SAMPLE_CM),
            pockets: world
                .pockets()
                .iter()
                .map(|p| PocketView {
                    pocket_id: p.pocket_id.clone(),
                    side: p.side().name().to_string(),
                    exposed_fraction: p.exposed_fraction(),
                    gauge_pressure: p.gauge_pressure,
                    estimated_force: p.estimated_force(),
                })
                .collect(),
            actuators: Actuators {
                left: cmd.left_pressure,
                right: cmd.right_pressure,
                grow: cmd.grow,
            },
            counters: Counters {
                tick: world.ticks(),
                frames: world.hub_cycles(),
                dropped: 0,
            },
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("snapshot serializes")
    }

    pub fn tip(&self) -> Option<[f64; 2]> {
        self.body.last().copied()
    }
}
