use std::f64::consts::FRAC_PI_2;
use std::path::PathBuf;

use pocketvine::contact_controller::{run_trace, Mode, Side, TraceScript, Trigger};
use pocketvine::pocket_model::ResponseParams;
use pocketvine::vine_sim::scenario::Scenario;
use pocketvine::vine_sim::{
    detect_contacts, exposed_fraction, Obstacle, PocketSpan, Pose, RobotBody, TickReport, Touch, TouchTarget, World,
};
use proptest::prelude::*;

fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(format!("{name}.jsonl"))
}

fn load(name: &str) -> Scenario {
    Scenario::load(&scenario_path(name)).unwrap()
}

fn joints_match(body: &RobotBody) -> bool {
    (0..body.segments().len().saturating_sub(1)).all(|i| {
        let end = body.pose_on_segment(i, body.segments()[i].arc_length);
        let start = body.pose_on_segment(i + 1, 0.0);
        (end.x - start.x).abs() < 1e-9 && (end.y - start.y).abs() < 1e-9 && (end.heading - start.heading).abs() < 1e-9
    })
}

/// Runs a world to its scenario end, checking the per-tick invariants.
fn run_checked(scenario: Scenario) -> (World, Vec<TickReport>) {
    let duration = scenario.duration;
    let mut world = World::new(scenario).unwrap();
    let mut reports = Vec::new();
    let mut last_len = world.body().grown_length();
    while world.time() < duration {
        let r = world.tick();
        let body = world.body();
        assert!(body.grown_length() >= last_len, "retracted at t = {}", r.time);
        last_len = body.grown_length();
        let sum: f64 = body.segments().iter().map(|s| s.arc_length).sum();
        assert!((sum - body.grown_length()).abs() < 1e-9);
        assert!(body.segments().iter().all(|s| s.arc_length > 0.0));
        assert!(body.segments().iter().all(|s| s.curvature.abs() <= world.config().kappa_max));
        assert!(joints_match(body), "joint mismatch at t = {}", r.time);

        for side in [Side::Left, Side::Right] {
            let mine: Vec<_> = world.pockets().iter().filter(|p| p.side() == side).collect();
            for pair in mine.windows(2) {
                if pair[1].exposed_fraction() > 0.0 {
                    assert_eq!(pair[0].exposed_fraction(), 1.0, "{} before {}", pair[1].pocket_id, pair[0].pocket_id);
                }
            }
            let expected = world
                .pockets()
                .iter()
                .enumerate()
                .filter(|(_, p)| p.side() == side && p.exposed_fraction() >= world.config().eversion_threshold)
                .max_by(|a, b| a.1.span.start_arclength.total_cmp(&b.1.span.start_arclength))
                .map(|(i, _)| i);
            assert_eq!(world.front_pocket(side), expected);
        }
        for p in world.pockets() {
            assert!(p.gauge_pressure >= 0.0);
            let want = exposed_fraction(body.grown_length(), p.span.start_arclength, p.span.length);
            assert_eq!(p.exposed_fraction(), want);
            if p.exposed_fraction() == 0.0 {
                assert_eq!(p.current_force, 0.0);
            }
        }
        reports.push(r);
    }
    (world, reports)
}

/// Contact-driven growth episodes, grouped into runs not broken by straight
/// growth.
fn contact_runs(reports: &[TickReport]) -> Vec<usize> {
    let mut runs = vec![];
    let mut current = 0;
    for r in reports {
        if r.state.mode != r.previous {
            if r.trigger == Some(Trigger::Contact) {
                current += 1;
            } else if r.state.mode == Mode::GrowingStraight && current > 0 {
                runs.push(current);
                current = 0;
            }
        }
    }
    if current > 0 {
        runs.push(current);
    }
    runs
}

/// Ticks from the first front-sensor reading at or over threshold on the
/// steered side to the matching growth state.
fn reaction_latencies(reports: &[TickReport], threshold: f64) -> Vec<u64> {
    let mut out = vec![];
    let mut crossing: Option<(u64, Mode)> = None;
    for r in reports {
        let steered = match r.previous {
            Mode::SearchingLeft => Some((r.front_left, Mode::GrowingLeft)),
            Mode::SearchingRight => Some((r.front_right, Mode::GrowingRight)),
            _ => None,
        };
        if let Some((p, target)) = steered {
            if p >= threshold && crossing.is_none() {
                crossing = Some((r.tick, target));
            }
        }
        if let Some((t0, target)) = crossing {
            if r.state.mode == target {
                out.push(r.tick - t0);
                crossing = None;
            }
        }
    }
    assert!(crossing.is_none(), "a crossing never led to growth");
    out
}

#[test]
fn small_object_is_abandoned_after_one_wrap() {
    let sc = load("small_object");
    let threshold = sc.controller.contact_threshold;
    let (_, reports) = run_checked(sc);
    assert_eq!(contact_runs(&reports), [1]);
    let entries: Vec<Mode> = reports.iter().filter(|r| r.state.mode != r.previous).map(|r| r.state.mode).collect();
    let gr = entries.iter().position(|&m| m == Mode::GrowingRight).unwrap();
    assert_eq!(&entries[gr..gr + 3], [Mode::GrowingRight, Mode::SearchingRight, Mode::GrowingStraight]);
    let lat = reaction_latencies(&reports, threshold);
    assert_eq!(lat.len(), 1);
    assert!(lat.iter().all(|&l| l <= 2));
}

#[test]
fn large_object_is_wrapped() {
    let sc = load("large_object");
    let diameter = 2.0 * sc.obstacles[0].radius;
    assert!(diameter > 2.0 / sc.sim.kappa_max);
    let threshold = sc.controller.contact_threshold;
    let (_, reports) = run_checked(sc);
    let runs = contact_runs(&reports);
    assert!(runs.iter().any(|&n| n >= 2), "runs {runs:?}");
    assert!(reaction_latencies(&reports, threshold).iter().all(|&l| l <= 2));
}

#[test]
fn empty_scenario_only_searches() {
    let (_, reports) = run_checked(load("empty"));
    assert!(reports.iter().all(|r| !matches!(r.state.mode, Mode::GrowingLeft | Mode::GrowingRight)));
}

#[test]
fn quiet_world_holds_initial_pressure() {
    let mut sc = load("empty");
    sc.sim.response = ResponseParams::noiseless();
    sc.duration = 120.0;
    let mut world = World::new(sc).unwrap();
    while world.time() < 120.0 {
        world.tick();
        for p in world.pockets().iter().filter(|p| p.exposed_fraction() > 0.0) {
            assert!((p.gauge_pressure - p.initial_pressure()).abs() < 1e-9);
        }
    }
}

#[test]
fn idle_world_matches_standalone_controller() {
    let mut sc = Scenario::default();
    sc.seed = 11;
    let mut world = World::new(sc).unwrap();
    let reports = world.run_until(60.0);
    let script = TraceScript::new(0.05, Mode::GrowingStraight).hold(60.0, 0.0, 0.0);
    let oracle = run_trace(&script, &Default::default());
    assert_eq!(reports.len(), oracle.len());
    for (r, (t, s)) in reports.iter().zip(&oracle) {
        assert_eq!(r.time, *t);
        assert_eq!(r.state.mode, s.mode);
    }
}

#[test]
fn touch_latency_within_two_ticks() {
    for (pocket, mode, grow) in [("L0", Mode::SearchingLeft, Mode::GrowingLeft), ("R0", Mode::SearchingRight, Mode::GrowingRight)] {
        let mut sc = Scenario::default();
        sc.sim.initial_mode = mode;
        sc.sim.initial_length = 27.5;
        sc.touches.push(Touch { target: TouchTarget::Pocket(pocket.into()), force: 5.0, duration: 3.0, start: 2.0 });
        let threshold = sc.controller.contact_threshold;
        let mut world = World::new(sc).unwrap();
        let reports = world.run_until(6.0);
        let lat = reaction_latencies(&reports, threshold);
        assert_eq!(lat.len(), 1);
        assert!(lat[0] <= 2);
        assert!(reports.iter().any(|r| r.state.mode == grow));
    }
}

#[test]
fn same_seed_same_run() {
    let run = || {
        let sc = load("small_object");
        let mut w = World::new(sc).unwrap();
        w.run_until(70.0);
        (w.pockets().iter().map(|p| p.gauge_pressure).collect::<Vec<_>>(), w.body().tip())
    };
    assert_eq!(run(), run());
}

fn brute_distance(body: &RobotBody, q: [f64; 2]) -> f64 {
    let n = 20_000;
    (0..=n)
        .map(|i| {
            let p = body.pose_at(body.grown_length() * i as f64 / n as f64);
            (p.x - q[0]).hypot(p.y - q[1])
        })
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone)]
enum Op {
    Grow(f64, f64),
    Reshape(f64, f64),
}

fn any_op() -> impl Strategy<Value = Op> {
    let k = -0.025f64..0.025;
    prop_oneof![
        (0.01f64..15.0, k.clone()).prop_map(|(l, k)| Op::Grow(l, k)),
        (0.0f64..40.0, k).prop_map(|(l, k)| Op::Reshape(l, k)),
    ]
}

fn build(ops: &[Op]) -> (RobotBody, bool) {
    let mut b = RobotBody::new(Pose::new(0.0, 0.0, FRAC_PI_2), 20.3);
    let mut monotone = true;
    for op in ops {
        let before = b.grown_length();
        match *op {
            Op::Grow(l, k) => b.grow(l, k),
            Op::Reshape(l, k) => b.reshape_distal(l, k),
        }
        monotone &= b.grown_length() >= before;
    }
    (b, monotone)
}

proptest! {
    #[test]
    fn random_bodies_keep_invariants(ops in prop::collection::vec(any_op(), 1..30)) {
        let (b, monotone) = build(&ops);
        prop_assert!(monotone);
        prop_assert!(joints_match(&b));
        let sum: f64 = b.segments().iter().map(|s| s.arc_length).sum();
        prop_assert!((sum - b.grown_length()).abs() < 1e-9);
    }

    #[test]
    fn closest_point_agrees_with_sampling(ops in prop::collection::vec(any_op(), 1..12),
                                          qx in -80.0f64..80.0, qy in -40.0f64..120.0) {
        let (b, _) = build(&ops);
        prop_assume!(b.grown_length() > 1.0);
        let cp = b.closest_point([qx, qy], 0.0, b.grown_length()).unwrap();
        let brute = brute_distance(&b, [qx, qy]);
        // sampling can only overestimate, by at most half a sample spacing
        prop_assert!(cp.distance <= brute + 1e-9);
        prop_assert!(brute - cp.distance <= 0.5 * b.grown_length() / 20_000.0 + 1e-9);
    }
}

#[test]
fn tangent_obstacle_force_on_facing_side() {
    // straight body, obstacle 0.5 cm into the right side at 40 cm
    let mut b = RobotBody::new(Pose::new(0.0, 0.0, FRAC_PI_2), 20.3);
    b.grow(55.0, 0.0);
    let spans: Vec<PocketSpan> = (0..2)
        .flat_map(|k| {
            [Side::Left, Side::Right].map(|side| PocketSpan {
                side,
                start_arclength: 27.5 * k as f64,
                length: 27.5,
                exposed_fraction: 1.0,
            })
        })
        .collect();
    let ids: Vec<String> = ["L0", "R0", "L1", "R1"].map(String::from).to_vec();
    let radius = 12.0;
    let center_x = b.half_width() + radius - 0.5;
    let right = Obstacle { center: [center_x, 40.0], radius, stiffness: 4.0 };
    let f = detect_contacts(&b, &spans, &[right], &[], &ids, 6.0);
    assert!((f[3] - 2.0).abs() < 1e-9);
    assert_eq!(f.iter().filter(|&&x| x > 0.0).count(), 1);
    let left = Obstacle { center: [-center_x, 10.0], ..right };
    let f = detect_contacts(&b, &spans, &[left], &[], &ids, 6.0);
    assert!((f[0] - 2.0).abs() < 1e-9);
}
