//! Planar kinematic simulation of an everting vine robot steered by two
//! side actuators, with pocket sensors along both sides.

mod body;
mod contact;
pub mod scenario;
mod world;

use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

pub use body::{ClosestPoint, Pose, RobotBody, Segment};
pub use contact::{detect_contacts, exposed_fraction, nearest_pocket, Obstacle, PocketSpan, Touch, TouchTarget};
pub use world::{PocketInstance, TickReport, World};

use crate::contact_controller::Mode;
use crate::pocket_model::{Preset, ResponseParams};

/// Length of one sealed pocket, cm.
pub const POCKET_LENGTH_CM: f64 = 27.5;
/// Lay-flat width of the main body tube, cm.
pub const MAIN_TUBE_LAY_FLAT_CM: f64 = 20.3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Tick length, s.
    pub dt: f64,
    /// Tip extension speed while growing, cm/s.
    pub growth_rate: f64,
    pub kappa_max: f64,
    pub kappa_gain: f64,
    /// Actuator pressure that maps to full `kappa_gain`.
    pub steer_pressure_max: f64,
    /// Distal length bent in place while searching, cm.
    pub reshape_length: f64,
    /// Exposed fraction at which a pocket counts as a usable sensor.
    pub eversion_threshold: f64,
    /// Touches farther than this from every exposed pocket are lost, cm.
    pub capture_radius: f64,
    pub main_tube_lay_flat: f64,
    pub pockets_per_side: usize,
    pub pocket_length: f64,
    /// Arclength between consecutive pocket starts on one side, cm.
    pub pocket_pitch: f64,
    pub pocket_preset: Preset,
    pub initial_pressure: f64,
    pub contact_area: f64,
    pub response: ResponseParams,
    /// Body already everted at the start, grown straight.
    pub initial_length: f64,
    pub initial_mode: Mode,
    pub base: Pose,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.05,
            growth_rate: POCKET_LENGTH_CM / 12.0,
            kappa_max: 1.0 / 40.0,
            kappa_gain: 1.0 / 40.0,
            steer_pressure_max: 1.0,
            reshape_length: POCKET_LENGTH_CM,
            eversion_threshold: 0.9,
            capture_radius: 6.0,
            main_tube_lay_flat: MAIN_TUBE_LAY_FLAT_CM,
            pockets_per_side: 8,
            pocket_length: POCKET_LENGTH_CM,
            pocket_pitch: POCKET_LENGTH_CM,
            pocket_preset: Preset::Sealed,
            initial_pressure: 0.4,
            contact_area: 12.5,
            response: ResponseParams::default(),
            initial_length: 0.0,
            initial_mode: Mode::GrowingStraight,
            base: Pose::new(0.0, 0.0, FRAC_PI_2),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("dt", self.dt),
            ("growth_rate", self.growth_rate),
            ("kappa_max", self.kappa_max),
            ("steer_pressure_max", self.steer_pressure_max),
            ("main_tube_lay_flat", self.main_tube_lay_flat),
            ("pocket_length", self.pocket_length),
            ("response.time_constant_s", self.response.time_constant_s),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        let non_negative = [
            ("kappa_gain", self.kappa_gain),
            ("reshape_length", self.reshape_length),
            ("capture_radius", self.capture_radius),
            ("initial_length", self.initial_length),
            ("response.noise_sigma_kpa", self.response.noise_sigma_kpa),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(format!("{name} must be >= 0, got {v}"));
            }
        }
        if !(self.eversion_threshold > 0.0 && self.eversion_threshold <= 1.0) {
            return Err("eversion_threshold must be in (0, 1]".into());
        }
        if self.pocket_pitch < self.pocket_length {
            return Err("pocket_pitch must be at least pocket_length".into());
        }
        if 2 * self.pockets_per_side > crate::sensor_hub::MAX_SENSORS {
            return Err(format!(
                "{} pockets exceed the hub's {} sensors",
                2 * self.pockets_per_side,
                crate::sensor_hub::MAX_SENSORS
            ));
        }
        Ok(())
    }
}

/// Curvature command for a pair of actuator pressures. Positive bends left.
pub fn steer(left_pressure: f64, right_pressure: f64, cfg: &SimConfig) -> f64 {
    let k = cfg.kappa_gain * (left_pressure - right_pressure) / cfg.steer_pressure_max;
    k.clamp(-cfg.kappa_max, cfg.kappa_max)
}

/// Smallest obstacle diameter the body can wrap continuously.
pub fn min_wrap_diameter(kappa_max: f64) -> f64 {
    2.0 / kappa_max
}

/// Circumferential sensor placement on the body cross-section. Geometry only;
/// the simulation itself is planar with one sensor row per side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialLayout {
    /// Actuator positions around the tube, degrees.
    pub actuator_angles_deg: Vec<f64>,
    /// Sensor positions around the tube, degrees.
    pub sensor_angles_deg: Vec<f64>,
    /// Sensors repeated along the length per circumferential position.
    pub sensors_along_length: usize,
}

impl RadialLayout {
    /// Three actuators 120 degrees apart, a sensor on top of each and one
    /// between each pair.
    pub fn three_actuator() -> Self {
        Self {
            actuator_angles_deg: vec![90.0, 210.0, 330.0],
            sensor_angles_deg: vec![30.0, 90.0, 150.0, 210.0, 270.0, 330.0],
            sensors_along_length: 1,
        }
    }

    /// Two actuators along the bottom, nine sensors in a row.
    pub fn two_actuator_bottom() -> Self {
        Self {
            actuator_angles_deg: vec![240.0, 300.0],
            sensor_angles_deg: vec![270.0],
            sensors_along_length: 9,
        }
    }

    /// Tabletop demo: an actuator on each side with three sensors on top of it.
    pub fn tabletop_demo() -> Self {
        Self {
            actuator_angles_deg: vec![0.0, 180.0],
            sensor_angles_deg: vec![0.0, 180.0],
            sensors_along_length: 3,
        }
    }

    pub fn sensor_count(&self) -> usize {
        self.sensor_angles_deg.len() * self.sensors_along_length
    }
}
