use serde::{Deserialize, Serialize};

use super::body::{dist, RobotBody};
use crate::contact_controller::Side;

/// Rigid disc the body can press into.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub center: [f64; 2],
    pub radius: f64,
    /// N per cm of penetration.
    pub stiffness: f64,
}

impl Obstacle {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.radius > 0.0 && self.stiffness > 0.0) {
            return Err("obstacle radius and stiffness must be > 0".into());
        }
        if !(self.center[0].is_finite() && self.center[1].is_finite()) {
            return Err("obstacle center must be finite".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TouchTarget {
    Position([f64; 2]),
    Pocket(String),
}

/// Hand-applied force, active for `duration` seconds from `start`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Touch {
    pub target: TouchTarget,
    pub force: f64,
    pub duration: f64,
    pub start: f64,
}

impl Touch {
    pub fn active_at(&self, t: f64) -> bool {
        t >= self.start && t < self.start + self.duration
    }
}

/// Geometry of one pocket mounted along a side of the body.
#[derive(Debug, Clone, PartialEq)]
pub struct PocketSpan {
    pub side: Side,
    pub start_arclength: f64,
    pub length: f64,
    pub exposed_fraction: f64,
}

impl PocketSpan {
    pub fn covers(&self, s: f64) -> bool {
        self.exposed_fraction > 0.0
            && s >= self.start_arclength - BOUNDARY_EPS_CM
            && s <= self.start_arclength + self.length + BOUNDARY_EPS_CM
    }
}

/// Arclength slack when comparing against pocket boundaries, cm. Growth is
/// accumulated tick by tick and lands within rounding of the boundaries.
pub const BOUNDARY_EPS_CM: f64 = 1e-9;

pub fn exposed_fraction(grown_length: f64, start: f64, length: f64) -> f64 {
    let out = grown_length - start;
    if out < BOUNDARY_EPS_CM {
        0.0
    } else if out > length - BOUNDARY_EPS_CM {
        1.0
    } else {
        out / length
    }
}

/// Which side of the body at pose `at` the point `q` lies on.
fn facing_side(body: &RobotBody, s: f64, q: [f64; 2]) -> Side {
    let pose = body.pose_at(s);
    let t = pose.tangent();
    let cross = t[0] * (q[1] - pose.y) - t[1] * (q[0] - pose.x);
    if cross >= 0.0 {
        Side::Left
    } else {
        Side::Right
    }
}

/// Force in N on each pocket.
///
/// An obstacle pushes with stiffness times the depth of the deepest body
/// point inside it, onto the exposed pocket covering that point on the side
/// facing the obstacle. A touch lands on the nearest exposed pocket within
/// `capture_radius` of it, or on the named pocket. Unexposed pockets never
/// receive force.
pub fn detect_contacts(
    body: &RobotBody,
    pockets: &[PocketSpan],
    obstacles: &[Obstacle],
    touches: &[(TouchTarget, f64)],
    pocket_ids: &[String],
    capture_radius: f64,
) -> Vec<f64> {
    let mut forces = vec![0.0; pockets.len()];
    let half_width = body.half_width();
    let grown = body.grown_length();

    for ob in obstacles {
        let Some(cp) = body.closest_point(ob.center, 0.0, grown) else {
            continue;
        };
        let depth = ob.radius + half_width - cp.distance;
        if depth <= 0.0 {
            continue;
        }
        let side = facing_side(body, cp.arclength, ob.center);
        if let Some(i) = pockets
            .iter()
            .position(|p| p.side == side && p.covers(cp.arclength))
        {
            forces[i] += ob.stiffness * depth;
        }
    }

    for (target, force) in touches {
        let hit = match target {
            TouchTarget::Pocket(id) => pocket_ids
                .iter()
                .position(|p| p == id)
                .filter(|&i| pockets[i].exposed_fraction > 0.0),
            TouchTarget::Position(q) => nearest_pocket(body, pockets, *q, capture_radius),
        };
        if let Some(i) = hit {
            forces[i] += force.max(0.0);
        }
    }
    forces
}

/// Exposed pocket whose outer surface passes nearest to `q`, if within
/// `capture_radius`.
pub fn nearest_pocket(
    body: &RobotBody,
    pockets: &[PocketSpan],
    q: [f64; 2],
    capture_radius: f64,
) -> Option<usize> {
    let grown = body.grown_length();
    let half_width = body.half_width();
    let mut best: Option<(usize, f64)> = None;
    for (i, p) in pockets.iter().enumerate() {
        if p.exposed_fraction <= 0.0 {
            continue;
        }
        let from = p.start_arclength;
        let to = (p.start_arclength + p.length).min(grown);
        let d = surface_distance(body, p.side, from, to, half_width, q);
        if d <= capture_radius && best.is_none_or(|(_, bd)| d < bd) {
            best = Some((i, d));
        }
    }
    best.map(|(i, _)| i)
}

fn surface_distance(body: &RobotBody, side: Side, from: f64, to: f64, offset: f64, q: [f64; 2]) -> f64 {
    const STEP: f64 = 0.25;
    let sign = match side {
        Side::Left => 1.0,
        Side::Right => -1.0,
    };
    let n = ((to - from) / STEP).ceil().max(1.0) as usize;
    (0..=n)
        .map(|k| {
            let s = from + (to - from) * k as f64 / n as f64;
            let pose = body.pose_at(s);
            let nrm = pose.left_normal();
            let p = [pose.x + sign * offset * nrm[0], pose.y + sign * offset * nrm[1]];
            dist(p, q)
        })
        .fold(f64::INFINITY, f64::min)
}
