use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::contact::{detect_contacts, exposed_fraction, PocketSpan, Touch, TouchTarget};
use super::scenario::Scenario;
use super::{steer, Obstacle, RobotBody, SimConfig};
use crate::contact_controller::{
    step_traced, ActuatorCommand, ControllerConfig, ControllerState, Mode, Side, Trigger,
};
use crate::pocket_model::{
    estimate_force, sensitivity_for, ContactSpec, PocketResponse, PressureState, Sensitivity,
};
use crate::sensor_hub::{SensorAddress, SensorHub, SensorReading, SharedGauge};

/// One sensor pocket mounted on the body.
#[derive(Debug, Clone)]
pub struct PocketInstance {
    pub pocket_id: String,
    pub span: PocketSpan,
    /// Force applied during the last tick, N.
    pub current_force: f64,
    /// Last reading, kPa.
    pub gauge_pressure: f64,
    response: PocketResponse,
    gauge: SharedGauge,
}

impl PocketInstance {
    pub fn side(&self) -> Side {
        self.span.side
    }

    pub fn exposed_fraction(&self) -> f64 {
        self.span.exposed_fraction
    }

    pub fn initial_pressure(&self) -> f64 {
        self.response.p_initial()
    }

    pub fn sensitivity(&self) -> Sensitivity {
        self.response.sensitivity()
    }

    /// Force inferred from the last reading.
    pub fn estimated_force(&self) -> f64 {
        estimate_force(
            PressureState {
                p_initial: self.response.p_initial(),
                p_sensed: self.gauge_pressure,
            },
            self.response.sensitivity(),
        )
    }
}

/// What happened during one tick.
#[derive(Debug, Clone, PartialEq)]
pub struct TickReport {
    /// Zero-based index of the tick.
    pub tick: u64,
    /// Simulated time at which the tick sampled the sensors, s.
    pub time: f64,
    pub previous: Mode,
    pub state: ControllerState,
    pub trigger: Option<Trigger>,
    pub front_left: f64,
    pub front_right: f64,
}

/// The whole simulated setup, advanced one fixed step at a time.
pub struct World {
    scenario: Scenario,
    cfg: SimConfig,
    controller_cfg: ControllerConfig,
    body: RobotBody,
    pockets: Vec<PocketInstance>,
    touches: Vec<Touch>,
    controller: ControllerState,
    command: ActuatorCommand,
    hub: SensorHub,
    readings: Vec<SensorReading>,
    rng: ChaCha8Rng,
    ticks: u64,
}

impl World {
    pub fn new(scenario: Scenario) -> Result<Self, String> {
        let cfg = scenario.sim.clone();
        cfg.validate()?;
        scenario.controller.validate()?;
        for ob in &scenario.obstacles {
            ob.validate()?;
        }

        let mut body = RobotBody::new(cfg.base, cfg.main_tube_lay_flat);
        body.grow(cfg.initial_length, 0.0);

        let pocket_cfg = cfg
            .pocket_preset
            .config()
            .with_initial_pressure(cfg.initial_pressure);
        let contact = ContactSpec::top(cfg.contact_area);
        let s = sensitivity_for(&pocket_cfg, &contact).map_err(|e| e.to_string())?;

        let mut hub = SensorHub::new();
        let mut pockets = Vec::with_capacity(2 * cfg.pockets_per_side);
        for k in 0..cfg.pockets_per_side {
            for side in [Side::Left, Side::Right] {
                let pocket_id = format!("{}{k}", if side == Side::Left { "L" } else { "R" });
                let start = k as f64 * cfg.pocket_pitch;
                let gauge = SharedGauge::new(cfg.initial_pressure);
                hub.attach(SensorAddress::sequential(pockets.len(), pocket_id.clone()), gauge.clone())
                    .map_err(|e| e.to_string())?;
                pockets.push(PocketInstance {
                    pocket_id,
                    span: PocketSpan {
                        side,
                        start_arclength: start,
                        length: cfg.pocket_length,
                        exposed_fraction: exposed_fraction(body.grown_length(), start, cfg.pocket_length),
                    },
                    current_force: 0.0,
                    gauge_pressure: cfg.initial_pressure,
                    response: PocketResponse::new(cfg.initial_pressure, s, cfg.response),
                    gauge,
                });
            }
        }

        let controller = ControllerState::new(cfg.initial_mode, 0.0);
        let command = ActuatorCommand::for_mode(controller.mode, &scenario.controller);
        Ok(Self {
            controller_cfg: scenario.controller,
            touches: scenario.touches.clone(),
            rng: ChaCha8Rng::seed_from_u64(scenario.seed),
            scenario,
            cfg,
            body,
            pockets,
            controller,
            command,
            hub,
            readings: Vec::new(),
            ticks: 0,
        })
    }

    /// Back to the state [`World::new`] produced, including the random stream.
    pub fn reset(&mut self) {
        *self = World::new(self.scenario.clone()).expect("scenario validated at construction");
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn controller_config(&self) -> &ControllerConfig {
        &self.controller_cfg
    }

    pub fn set_controller_config(&mut self, cfg: ControllerConfig) -> Result<(), String> {
        cfg.validate()?;
        self.controller_cfg = cfg;
        Ok(())
    }

    pub fn ticks(&self) -> u64 {
        self.ticks
    }

    /// Simulated time elapsed, s.
    pub fn time(&self) -> f64 {
        self.ticks as f64 * self.cfg.dt
    }

    pub fn body(&self) -> &RobotBody {
        &self.body
    }

    pub fn pockets(&self) -> &[PocketInstance] {
        &self.pockets
    }

    pub fn obstacles(&self) -> &[Obstacle] {
        &self.scenario.obstacles
    }

    pub fn controller(&self) -> ControllerState {
        self.controller
    }

    pub fn command(&self) -> ActuatorCommand {
        self.command
    }

    pub fn hub_cycles(&self) -> u64 {
        self.hub.cycles()
    }

    /// Readings from the most recent hub poll.
    pub fn readings(&self) -> &[SensorReading] {
        &self.readings
    }

    /// Schedules a touch starting with the next tick.
    pub fn apply_touch(&mut self, target: TouchTarget, force: f64, duration: f64) {
        self.touches.push(Touch {
            target,
            force,
            duration,
            start: self.time(),
        });
    }

    /// Index of the front pocket on `side`: the exposed pocket farthest from
    /// the base whose exposed fraction reaches the eversion threshold.
    pub fn front_pocket(&self, side: Side) -> Option<usize> {
        self.pockets
            .iter()
            .enumerate()
            .filter(|(_, p)| p.span.side == side && p.span.exposed_fraction >= self.cfg.eversion_threshold)
            .max_by(|a, b| a.1.span.start_arclength.total_cmp(&b.1.span.start_arclength))
            .map(|(i, _)| i)
    }

    fn front_reading(&self, side: Side) -> f64 {
        let Some(i) = self.front_pocket(side) else { return 0.0 };
        let id = &self.pockets[i].pocket_id;
        self.readings
            .iter()
            .find(|r| &r.logical_id == id)
            .map_or(0.0, |r| r.gauge_pressure_kpa)
    }

    /// Advances one step: contacts, pocket pressures, hub poll, controller,
    /// then steering and growth.
    pub fn tick(&mut self) -> TickReport {
        let dt = self.cfg.dt;
        let now = self.time();

        self.touches.retain(|t| now < t.start + t.duration);
        let active: Vec<(TouchTarget, f64)> = self
            .touches
            .iter()
            .filter(|t| t.active_at(now))
            .map(|t| (t.target.clone(), t.force))
            .collect();
        let spans: Vec<PocketSpan> = self.pockets.iter().map(|p| p.span.clone()).collect();
        let ids: Vec<String> = self.pockets.iter().map(|p| p.pocket_id.clone()).collect();
        let forces = detect_contacts(
            &self.body,
            &spans,
            &self.scenario.obstacles,
            &active,
            &ids,
            self.cfg.capture_radius,
        );

        for (pocket, force) in self.pockets.iter_mut().zip(forces) {
            pocket.current_force = force;
            pocket.gauge_pressure = pocket.response.advance(force, dt, &mut self.rng);
            pocket.gauge.set(pocket.gauge_pressure);
        }

        self.readings = self.hub.poll_cycle(now).unwrap_or_default();

        let front_left = self.front_reading(Side::Left);
        let front_right = self.front_reading(Side::Right);
        let previous = self.controller.mode;
        let (next, trigger) = step_traced(self.controller, front_left, front_right, now, &self.controller_cfg);
        self.controller = next;
        self.command = ActuatorCommand::for_mode(next.mode, &self.controller_cfg);

        let kappa = steer(self.command.left_pressure, self.command.right_pressure, &self.cfg);
        if next.mode == Mode::GrowingStraight && previous != Mode::GrowingStraight {
            // steering released on giving up
            self.body.reshape_distal(self.cfg.reshape_length, 0.0);
        }
        if next.mode.is_searching() {
            self.body.reshape_distal(self.cfg.reshape_length, kappa);
        }
        if self.command.grow {
            self.body.grow(self.cfg.growth_rate * dt, kappa);
        }
        let grown = self.body.grown_length();
        for p in &mut self.pockets {
            p.span.exposed_fraction = exposed_fraction(grown, p.span.start_arclength, p.span.length);
        }

        let tick = self.ticks;
        self.ticks += 1;
        TickReport {
            tick,
            time: now,
            previous,
            state: next,
            trigger,
            front_left,
            front_right,
        }
    }

    /// Ticks until simulated time reaches `until`, returning every report.
    pub fn run_until(&mut self, until: f64) -> Vec<TickReport> {
        let mut out = Vec::new();
        while self.time() + 0.5 * self.cfg.dt < until {
            out.push(self.tick());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact_controller::{run_trace, TraceScript};
    use crate::pocket_model::ResponseParams;
    use approx::assert_abs_diff_eq;

    fn quiet() -> Scenario {
        let mut s = Scenario::default();
        s.sim.response = ResponseParams::noiseless();
        s
    }

    #[test]
    fn one_tick_in_empty_world() {
        let mut w = World::new(quiet()).unwrap();
        let r = w.tick();
        assert_eq!(r.state.mode, Mode::GrowingStraight);
        assert_abs_diff_eq!(w.body().grown_length(), 27.5 / 12.0 * 0.05, epsilon = 1e-12);
        assert_eq!(w.hub_cycles(), 1);
        assert_eq!(w.readings().len(), 16);
    }

    #[test]
    fn twelve_seconds_expose_one_pocket_pair() {
        let mut w = World::new(quiet()).unwrap();
        w.run_until(12.0);
        assert_abs_diff_eq!(w.body().grown_length(), 27.5, epsilon = 1e-9);
        let full: Vec<_> = w.pockets().iter().filter(|p| p.exposed_fraction() >= 1.0 - 1e-9).collect();
        assert_eq!(full.len(), 2);
        assert!(w.pockets()[2..].iter().all(|p| p.exposed_fraction() < 1e-9));
    }

    #[test]
    fn idle_run_follows_controller_trace() {
        let mut w = World::new(quiet()).unwrap();
        let reports = w.run_until(60.0);
        let script = TraceScript::new(0.05, Mode::GrowingStraight).hold(60.0, 0.4, 0.4);
        let oracle = run_trace(&script, &ControllerConfig::default());
        for r in &reports {
            let k = r.tick as usize;
            assert_eq!(oracle[k].0, r.time);
            assert_eq!(oracle[k].1.mode, r.state.mode, "t = {}", r.time);
        }
    }

    #[test]
    fn touch_while_searching_left_starts_left_growth() {
        let mut s = quiet();
        s.sim.initial_mode = Mode::SearchingLeft;
        s.sim.initial_length = 27.5;
        s.touches.push(Touch {
            target: TouchTarget::Pocket("L0".into()),
            force: 4.0,
            duration: 5.0,
            start: 1.0,
        });
        let mut w = World::new(s).unwrap();
        let reports = w.run_until(5.0);
        let crossing = reports.iter().position(|r| r.front_left >= 1.01).unwrap();
        assert_eq!(reports[crossing].state.mode, Mode::GrowingLeft);
        assert_eq!(reports[crossing - 1].state.mode, Mode::SearchingLeft);
        assert_eq!(reports[crossing].trigger, Some(Trigger::Contact));
    }

    #[test]
    fn reset_replays_identically() {
        let mut s = Scenario::default();
        s.seed = 3;
        let mut w = World::new(s).unwrap();
        let a: Vec<f64> = (0..50).map(|_| { w.tick(); w.pockets()[0].gauge_pressure }).collect();
        w.reset();
        assert_eq!(w.ticks(), 0);
        let b: Vec<f64> = (0..50).map(|_| { w.tick(); w.pockets()[0].gauge_pressure }).collect();
        assert_eq!(a, b);
    }
}
