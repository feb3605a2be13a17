use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// Planar position and heading (radians, counter-clockwise from +x).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Self { x, y, heading }
    }

    pub fn point(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    pub fn tangent(&self) -> [f64; 2] {
        [self.heading.cos(), self.heading.sin()]
    }

    /// Unit normal pointing to the body's left.
    pub fn left_normal(&self) -> [f64; 2] {
        [-self.heading.sin(), self.heading.cos()]
    }

    /// Pose after travelling `length` along an arc of curvature `kappa`.
    pub fn advance(&self, kappa: f64, length: f64) -> Pose {
        let half = 0.5 * kappa * length;
        let chord = length * sinc(half);
        let mid = self.heading + half;
        Pose {
            x: self.x + chord * mid.cos(),
            y: self.y + chord * mid.sin(),
            heading: self.heading + kappa * length,
        }
    }
}

fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-4 {
        1.0 - u * u / 6.0
    } else {
        u.sin() / u
    }
}

/// Constant-curvature piece of the body. Positive curvature bends left.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub arc_length: f64,
    pub curvature: f64,
}

/// Everted body: a chain of constant-curvature arcs from the base to the tip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotBody {
    segments: Vec<Segment>,
    base: Pose,
    grown_length: f64,
    pub main_tube_lay_flat_cm: f64,
}

/// Point of the body centerline closest to some query point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosestPoint {
    pub arclength: f64,
    pub pose: Pose,
    pub distance: f64,
}

impl RobotBody {
    pub fn new(base: Pose, main_tube_lay_flat_cm: f64) -> Self {
        Self {
            segments: Vec::new(),
            base,
            grown_length: 0.0,
            main_tube_lay_flat_cm,
        }
    }

    pub fn base(&self) -> Pose {
        self.base
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn grown_length(&self) -> f64 {
        self.grown_length
    }

    /// Radius of the inflated main tube.
    pub fn half_width(&self) -> f64 {
        self.main_tube_lay_flat_cm / PI
    }

    /// Extends the tip by `dl` at `curvature`. Material already everted keeps
    /// its shape.
    pub fn grow(&mut self, dl: f64, curvature: f64) {
        if !(dl > 0.0) {
            return;
        }
        match self.segments.last_mut() {
            Some(tip) if tip.curvature == curvature => tip.arc_length += dl,
            _ => self.segments.push(Segment {
                arc_length: dl,
                curvature,
            }),
        }
        self.grown_length += dl;
    }

    /// Bends the distal `length` of the body to `curvature` without growing.
    pub fn reshape_distal(&mut self, length: f64, curvature: f64) {
        let span = length.min(self.grown_length);
        if !(span > 0.0) {
            return;
        }
        if let Some(tip) = self.segments.last() {
            if tip.curvature == curvature && tip.arc_length >= span {
                return;
            }
        }
        let mut remaining = span;
        while remaining > 0.0 {
            let Some(last) = self.segments.last_mut() else { break };
            if last.arc_length > remaining {
                last.arc_length -= remaining;
                remaining = 0.0;
            } else {
                remaining -= last.arc_length;
                self.segments.pop();
            }
        }
        match self.segments.last_mut() {
            Some(prev) if prev.curvature == curvature => prev.arc_length += span,
            _ => self.segments.push(Segment {
                arc_length: span,
                curvature,
            }),
        }
    }

    /// Start pose of every segment, plus the tip pose at the end.
    pub fn joint_poses(&self) -> Vec<Pose> {
        let mut poses = Vec::with_capacity(self.segments.len() + 1);
        let mut pose = self.base;
        poses.push(pose);
        for seg in &self.segments {
            pose = pose.advance(seg.curvature, seg.arc_length);
            poses.push(pose);
        }
        poses
    }

    /// Pose `local` cm into segment `index`.
    pub fn pose_on_segment(&self, index: usize, local: f64) -> Pose {
        let start = self
            .segments
            .iter()
            .take(index)
            .fold(self.base, |p, s| p.advance(s.curvature, s.arc_length));
        start.advance(self.segments[index].curvature, local)
    }

    pub fn tip(&self) -> Pose {
        *self.joint_poses().last().expect("at least the base pose")
    }

    /// Pose at arclength `s` from the base, clamped to the body.
    pub fn pose_at(&self, s: f64) -> Pose {
        let mut pose = self.base;
        let mut left = s.max(0.0);
        for seg in &self.segments {
            if left <= seg.arc_length {
                return pose.advance(seg.curvature, left);
            }
            pose = pose.advance(seg.curvature, seg.arc_length);
            left -= seg.arc_length;
        }
        pose
    }

    /// Centerline points every `step` cm from base to tip, tip included.
    pub fn polyline(&self, step: f64) -> Vec<[f64; 2]> {
        let mut out = vec![self.base.point()];
        let mut pose = self.base;
        let mut next = step;
        let mut seg_start = 0.0;
        for seg in &self.segments {
            let seg_end = seg_start + seg.arc_length;
            while next < seg_end - 1e-9 {
                out.push(pose.advance(seg.curvature, next - seg_start).point());
                next += step;
            }
            pose = pose.advance(seg.curvature, seg.arc_length);
            seg_start = seg_end;
        }
        if self.grown_length > 0.0 {
            out.push(pose.point());
        }
        out
    }

    /// Closest centerline point to `q` over arclengths `[from, to]`.
    pub fn closest_point(&self, q: [f64; 2], from: f64, to: f64) -> Option<ClosestPoint> {
        if self.segments.is_empty() || to < from {
            return None;
        }
        let mut best: Option<ClosestPoint> = None;
        let mut start = self.base;
        let mut s0 = 0.0;
        for seg in &self.segments {
            let s1 = s0 + seg.arc_length;
            let lo = from.max(s0);
            let hi = to.min(s1);
            if lo <= hi {
                let local = closest_on_arc(start, seg.curvature, lo - s0, hi - s0, q);
                let pose = start.advance(seg.curvature, local);
                let d = dist(pose.point(), q);
                if best.is_none_or(|b| d < b.distance) {
                    best = Some(ClosestPoint {
                        arclength: s0 + local,
                        pose,
                        distance: d,
                    });
                }
            }
            start = start.advance(seg.curvature, seg.arc_length);
            s0 = s1;
        }
        best
    }
}

/// Local arclength in `[lo, hi]` of the arc starting at `start` that is
/// closest to `q`.
fn closest_on_arc(start: Pose, kappa: f64, lo: f64, hi: f64, q: [f64; 2]) -> f64 {
    let mut candidates = vec![lo, hi];
    if kappa.abs() < 1e-12 {
        let t = start.tangent();
        let along = (q[0] - start.x) * t[0] + (q[1] - start.y) * t[1];
        candidates.push(along.clamp(lo, hi));
    } else {
        let n = start.left_normal();
        let r = 1.0 / kappa;
        let center = [start.x + r * n[0], start.y + r * n[1]];
        if dist(center, q) > 0.0 {
            // angle of the start point and of q as seen from the center
            let a0 = (start.y - center[1]).atan2(start.x - center[0]);
            let aq = (q[1] - center[1]).atan2(q[0] - center[0]);
            let sweep = if kappa > 0.0 { aq - a0 } else { a0 - aq };
            let local = sweep.rem_euclid(2.0 * PI) / kappa.abs();
            if (lo..=hi).contains(&local) {
                candidates.push(local);
            }
        }
    }
    candidates
        .into_iter()
        .map(|s| (s, dist(start.advance(kappa, s).point(), q)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(s, _)| s)
        .unwrap_or(lo)
}

pub(crate) fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}
