//! Closed-loop simulation: scenario description, event schedule and the
//! runners for single loops, gain scheduling and min-selector override
//! control.

use thiserror::Error;

use crate::filter::FilterState;
use crate::pid::{AntiWindup, ControlInput, Controller, Mode, PidConfig, PidError};
use crate::plant::{Fopdt, FopdtParams, LeadLag, LeadLagParams, NoiseSource, Tank, TankParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    Pid(#[from] PidError),
    #[error("unknown example {0} (expected 1..=7)")]
    UnknownExample(u32),
    #[error("invalid override {key}={value}: {reason}")]
    Override {
        key: String,
        value: String,
        reason: String,
    },
}

/// Something that happens to the loop at a given time.
#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    SetSetpoint(f64),
    SetMode(Mode),
    SetManual(f64),
    SetParams(PidConfig),
    SetDisturbance(f64),
}

/// An action applied at the first sample instant `>= time`, before the
/// filter and controller run for that sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub time: f64,
    pub action: Action,
}

impl Event {
    pub fn new(time: f64, action: Action) -> Self {
        Event { time, action }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlantSpec {
    Fopdt(FopdtParams),
    Tank(TankParams),
}

/// Where the load disturbance `v` enters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DisturbancePath {
    /// Added to the control signal at the plant input.
    Input,
    /// Filtered by its own FOPDT model and added to the plant output.
    Model(FopdtParams),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub seed: u64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec {
            sigma: 0.0,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialConditions {
    pub r: f64,
    pub y: f64,
    pub u: f64,
    pub mode: Mode,
    pub uman: f64,
    pub v: f64,
}

impl Default for InitialConditions {
    fn default() -> Self {
        InitialConditions {
            r: 0.0,
            y: 0.0,
            u: 0.0,
            mode: Mode::Auto,
            uman: 0.0,
            v: 0.0,
        }
    }
}

/// One operating zone of a gain-scheduled loop, `[lower, upper)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Zone {
    pub lower: f64,
    pub upper: f64,
    pub kp: f64,
    pub ki: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheduling {
    /// One controller per zone; inactive ones track the plant input.
    Parallel,
    /// One controller whose gains are swapped on zone changes.
    Single,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layout {
    Single,
    GainScheduling {
        zones: Vec<Zone>,
        scheduling: Scheduling,
    },
    /// Two loops on two outputs of the same input; the smaller control signal
    /// is applied. The disturbance enters the first loop's plant only.
    MinSelector {
        setpoint2: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub duration: f64,
    pub dt: f64,
    pub plant: PlantSpec,
    pub controller: PidConfig,
    /// Process variable filter time constant; `0` disables it.
    pub tf: f64,
    pub events: Vec<Event>,
    pub noise: NoiseSpec,
    pub initial: InitialConditions,
    pub disturbance: DisturbancePath,
    pub feedforward: Option<LeadLagParams>,
    pub layout: Layout,
}

impl Scenario {
    /// A single FOPDT loop at rest with no events.
    pub fn basic(name: &str, plant: FopdtParams, controller: PidConfig, duration: f64) -> Self {
        Scenario {
            name: name.to_string(),
            duration,
            dt: controller.dt_nominal,
            plant: PlantSpec::Fopdt(plant),
            controller,
            tf: 0.0,
            events: Vec::new(),
            noise: NoiseSpec::default(),
            initial: InitialConditions::default(),
            disturbance: DisturbancePath::Input,
            feedforward: None,
            layout: Layout::Single,
        }
    }

    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let invalid = |msg: String| Err(ScenarioError::Invalid(msg));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return invalid(format!("dt must be > 0, got {}", self.dt));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return invalid(format!("duration must be > 0, got {}", self.duration));
        }
        if !(self.tf >= 0.0 && self.tf.is_finite()) {
            return invalid(format!("tf must be >= 0, got {}", self.tf));
        }
        if !(self.noise.sigma >= 0.0 && self.noise.sigma.is_finite()) {
            return invalid(format!(
                "noise sigma must be >= 0, got {}",
                self.noise.sigma
            ));
        }
        if let Some(pos) = self.events.windows(2).position(|w| {
            w[0].time.partial_cmp(&w[1].time) == Some(std::cmp::Ordering::Greater)
                || w[0].time.is_nan()
        }) {
            return invalid(format!(
                "events not sorted by time (event {} at t={} follows t={})",
                pos + 1,
                self.events[pos + 1].time,
                self.events[pos].time
            ));
        }
        if let Some(e) = self.events.iter().find(|e| !e.time.is_finite()) {
            return invalid(format!("event time must be finite, got {}", e.time));
        }
        match self.plant {
            PlantSpec::Fopdt(p) => {
                if !(p.t > 0.0 && p.l >= 0.0 && p.k.is_finite()) {
                    return invalid("plant needs t > 0, l >= 0 and finite k".into());
                }
            }
            PlantSpec::Tank(p) => {
                if !(p.area > 0.0 && p.outlet > 0.0 && p.g > 0.0) {
                    return invalid("tank constants must be > 0".into());
                }
            }
        }
        if let Layout::GainScheduling { zones, .. } = &self.layout {
            if zones.is_empty() {
                return invalid("gain scheduling needs at least one zone".into());
            }
        }
        self.controller.validate()?;
        for e in &self.events {
            if let Action::SetParams(cfg) = &e.action {
                cfg.validate()?;
            }
        }
        Ok(())
    }
}

/// Per-controller record for layouts with more than one controller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopRecord {
    pub r: f64,
    pub y: f64,
    pub yf: f64,
    pub mode: Mode,
    /// Controller output before selection.
    pub output: f64,
    /// Output minus the value it was built on (`xu` in auto, `utrack` in
    /// track).
    pub increment: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub r: f64,
    pub y: f64,
    pub yf: f64,
    /// Applied plant input.
    pub u: f64,
    pub mode: Mode,
    pub active: Option<usize>,
    pub v: Option<f64>,
    /// Nominal (unsaturated) control signal of the controller in charge.
    pub nominal: f64,
    /// Feed-forward signal passed to the controller.
    pub uff: f64,
    pub loops: Vec<LoopRecord>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    /// Times at which a single scheduled controller swapped its gains.
    pub param_swaps: Vec<f64>,
    /// Samples whose process variable fell outside every zone.
    pub zone_clamps: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn column(&self, f: impl Fn(&Sample) -> f64) -> Vec<f64> {
        self.samples.iter().map(f).collect()
    }

    pub fn u(&self) -> Vec<f64> {
        self.column(|s| s.u)
    }

    pub fn y(&self) -> Vec<f64> {
        self.column(|s| s.y)
    }

    /// Index of the first sample at or after `t`.
    pub fn index_at(&self, t: f64) -> Option<usize> {
        self.samples.iter().position(|s| s.t >= t - 1e-9)
    }
}

/// Signals shared by every layout and updated by the event schedule.
#[derive(Debug, Clone, Copy)]
struct LoopSignals {
    r: f64,
    mode: Mode,
    uman: f64,
    v: f64,
}

struct EventCursor<'a> {
    events: &'a [Event],
    next: usize,
    tolerance: f64,
}

impl<'a> EventCursor<'a> {
    fn new(events: &'a [Event], dt: f64) -> Self {
        EventCursor {
            events,
            next: 0,
            tolerance: 1e-6 * dt,
        }
    }

    /// Returns the events due at or before `t`, each exactly once.
    fn due(&mut self, t: f64) -> &'a [Event] {
        let start = self.next;
        while self.next < self.events.len() && self.events[self.next].time <= t + self.tolerance {
            self.next += 1;
        }
        &self.events[start..self.next]
    }
}

fn apply_signal_event(signals: &mut LoopSignals, action: &Action) -> Option<PidConfig> {
    match action {
        Action::SetSetpoint(r) => signals.r = *r,
        Action::SetMode(m) => signals.mode = *m,
        Action::SetManual(u) => signals.uman = *u,
        Action::SetDisturbance(v) => signals.v = *v,
        Action::SetParams(cfg) => return Some(*cfg),
    }
    None
}

enum PlantModel {
    Fopdt(Fopdt),
    Tank(Tank),
}

impl PlantModel {
    fn new(spec: PlantSpec, dt: f64, y0: f64, u0: f64) -> Self {
        match spec {
            PlantSpec::Fopdt(p) => {
                // Input history consistent with the initial output.
                let u_hist = if p.k != 0.0 { y0 / p.k } else { u0 };
                PlantModel::Fopdt(Fopdt::at_operating_point(p, dt, y0, u_hist))
            }
            PlantSpec::Tank(p) => PlantModel::Tank(Tank::new(p, dt, y0)),
        }
    }

    fn step(&mut self, u: f64) -> f64 {
        match self {
            PlantModel::Fopdt(p) => p.step(u),
            PlantModel::Tank(t) => t.step(u),
        }
    }
}

/// Plant, disturbance model, measurement noise and the process-variable
/// filter of one loop.
struct ProcessChain {
    plant: PlantModel,
    disturbance: DisturbancePath,
    disturbance_model: Option<Fopdt>,
    noise: NoiseSource,
    filter: FilterState,
    y: f64,
    dt: f64,
}

impl ProcessChain {
    fn new(s: &Scenario, noise_seed: u64, with_disturbance: bool) -> Self {
        let y0 = s.initial.y;
        let disturbance = if with_disturbance {
            s.disturbance
        } else {
            DisturbancePath::Input
        };
        let disturbance_model = match disturbance {
            DisturbancePath::Model(p) => Some(Fopdt::at_operating_point(
                p,
                s.dt,
                p.k * s.initial.v,
                s.initial.v,
            )),
            DisturbancePath::Input => None,
        };
        let y_dist = disturbance_model.as_ref().map_or(0.0, |m| m.output());
        let mut filter = FilterState::new(s.tf);
        filter.init(y0);
        ProcessChain {
            plant: PlantModel::new(s.plant, s.dt, y0 - y_dist, s.initial.u),
            disturbance,
            disturbance_model,
            noise: NoiseSource::new(s.noise.sigma, noise_seed),
            filter,
            y: y0,
            dt: s.dt,
        }
    }

    /// Advances the process over one sample period with inputs held at
    /// `u` and `v`.
    fn advance(&mut self, u: f64, v: f64) {
        self.y = match self.disturbance {
            DisturbancePath::Input => self.plant.step(u + v),
            DisturbancePath::Model(_) => {
                let yv = self.disturbance_model.as_mut().map_or(0.0, |m| m.step(v));
                self.plant.step(u) + yv
            }
        };
    }

    /// Measures (with noise) and filters the current output.
    fn measure(&mut self) -> (f64, f64) {
        let y_meas = self.y + self.noise.next_sample();
        let yf = self.filter.step(y_meas, self.dt);
        (y_meas, yf)
    }
}

fn has_disturbance(s: &Scenario) -> bool {
    s.initial.v != 0.0
        || s.feedforward.is_some()
        || matches!(s.disturbance, DisturbancePath::Model(_))
        || s.events
            .iter()
            .any(|e| matches!(e.action, Action::SetDisturbance(_)))
}

fn time_at(step: usize, dt: f64) -> f64 {
    step as f64 * dt
}

/// Runs any scenario with the runner matching its layout.
pub fn run(scenario: &Scenario) -> Result<Trajectory, ScenarioError> {
    match &scenario.layout {
        Layout::Single => run_closed_loop(scenario),
        Layout::GainScheduling {
            scheduling: Scheduling::Parallel,
            ..
        } => run_gain_scheduling_parallel(scenario),
        Layout::GainScheduling {
            scheduling: Scheduling::Single,
            ..
        } => run_gain_scheduling_single(scenario),
        Layout::MinSelector { .. } => run_selector(scenario),
    }
}

/// Basic loop: events, plant step with the previous input, noise, filter,
/// controller, record.
pub fn run_closed_loop(s: &Scenario) -> Result<Trajectory, ScenarioError> {
    s.validate()?;
    let mut ctrl = Controller::new(s.controller)?;
    ctrl.initialize(s.initial.r, s.initial.y, s.initial.u);
    let mut chain = ProcessChain::new(s, s.noise.seed, true);
    let mut ff = s.feedforward.map(|p| {
        let mut ll = LeadLag::new(p, s.dt);
        ll.settle(s.initial.v);
        ll
    });
    let record_v = has_disturbance(s);

    let mut sig = LoopSignals {
        r: s.initial.r,
        mode: s.initial.mode,
        uman: s.initial.uman,
        v: s.initial.v,
    };
    let mut cursor = EventCursor::new(&s.events, s.dt);
    let (mut u_prev, mut v_prev) = (s.initial.u, s.initial.v);
    let mut samples = Vec::with_capacity(s.steps() + 1);

    for k in 0..=s.steps() {
        let t = time_at(k, s.dt);
        for e in cursor.due(t) {
            if let Some(cfg) = apply_signal_event(&mut sig, &e.action) {
                ctrl.set_params(cfg)?;
            }
        }
        if k > 0 {
            chain.advance(u_prev, v_prev);
        }
        let (_, yf) = chain.measure();
        let uff = ff.as_mut().map_or(0.0, |f| f.step(sig.v));
        let input = ControlInput {
            r: sig.r,
            y: yf,
            uff,
            uman: sig.uman,
            utrack: 0.0,
            mode: sig.mode,
            dt: s.dt,
        };
        let u = ctrl.control(&input)?;
        samples.push(Sample {
            t,
            r: sig.r,
            y: chain.y,
            yf,
            u,
            mode: sig.mode,
            active: None,
            v: record_v.then_some(sig.v),
            nominal: ctrl.state().xu,
            uff,
            loops: Vec::new(),
        });
        u_prev = u;
        v_prev = sig.v;
    }
    Ok(Trajectory {
        samples,
        ..Trajectory::default()
    })
}

fn zones_of(s: &Scenario) -> Result<&[Zone], ScenarioError> {
    match &s.layout {
        Layout::GainScheduling { zones, .. } => Ok(zones),
        _ => Err(ScenarioError::Invalid(
            "scenario has no gain-scheduling zones".into(),
        )),
    }
}

/// Zone index for `y`; values outside all zones map to the nearest one and
/// report `false`.
pub fn zone_index(zones: &[Zone], y: f64) -> (usize, bool) {
    if let Some(i) = zones.iter().position(|z| y >= z.lower && y < z.upper) {
        return (i, true);
    }
    let last = zones.len() - 1;
    if y == zones[last].upper {
        return (last, true);
    }
    let nearest = zones
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| {
            let da = (a.lower - y).abs().min((a.upper - y).abs());
            let db = (b.lower - y).abs().min((b.upper - y).abs());
            da.total_cmp(&db)
        })
        .map_or(0, |(i, _)| i);
    (nearest, false)
}

fn zone_config(base: &PidConfig, zone: &Zone) -> PidConfig {
    PidConfig {
        kp: zone.kp,
        ki: zone.ki,
        ..*base
    }
}

fn increment_base(ctrl: &Controller, input: &ControlInput) -> f64 {
    match input.mode {
        Mode::Track => input.utrack,
        _ => ctrl.state().xu,
    }
}

/// Gain scheduling with one controller per zone. The controller of the
/// current zone runs in auto, the others track the applied plant input.
///
/// The controller taking over at a zone change tracks on its first step, so
/// the handover output is `u_prev` plus its own regular increment.
pub fn run_gain_scheduling_parallel(s: &Scenario) -> Result<Trajectory, ScenarioError> {
    s.validate()?;
    let zones = zones_of(s)?;
    let mut base = s.controller;
    let mut ctrls = zones
        .iter()
        .map(|z| {
            let mut c = Controller::new(zone_config(&base, z))?;
            c.initialize(s.initial.r, s.initial.y, s.initial.u);
            Ok(c)
        })
        .collect::<Result<Vec<_>, PidError>>()?;
    let mut chain = ProcessChain::new(s, s.noise.seed, true);
    let record_v = has_disturbance(s);
    let mut sig = LoopSignals {
        r: s.initial.r,
        mode: s.initial.mode,
        uman: s.initial.uman,
        v: s.initial.v,
    };
    let mut cursor = EventCursor::new(&s.events, s.dt);
    let (mut u_prev, mut v_prev) = (s.initial.u, s.initial.v);
    let mut previous_active = zone_index(zones, s.initial.y).0;
    let mut traj = Trajectory::default();

    for k in 0..=s.steps() {
        let t = time_at(k, s.dt);
        for e in cursor.due(t) {
            if let Some(cfg) = apply_signal_event(&mut sig, &e.action) {
                base = cfg;
                for (c, z) in ctrls.iter_mut().zip(zones) {
                    c.set_params(zone_config(&base, z))?;
                }
            }
        }
        if k > 0 {
            chain.advance(u_prev, v_prev);
        }
        let (_, yf) = chain.measure();
        let (active, inside) = zone_index(zones, yf);
        if !inside {
            traj.zone_clamps += 1;
        }

        let mut loops = Vec::with_capacity(ctrls.len());
        for (i, c) in ctrls.iter_mut().enumerate() {
            let mode = match sig.mode {
                Mode::Auto if i == active && i == previous_active => Mode::Auto,
                Mode::Auto => Mode::Track,
                other => other,
            };
            let input = ControlInput {
                r: sig.r,
                y: yf,
                uff: 0.0,
                uman: sig.uman,
                utrack: u_prev,
                mode,
                dt: s.dt,
            };
            let base_u = increment_base(c, &input);
            let out = c.control(&input)?;
            loops.push(LoopRecord {
                r: sig.r,
                y: chain.y,
                yf,
                mode,
                output: out,
                increment: out - base_u,
            });
        }
        let u = loops[active].output;
        traj.samples.push(Sample {
            t,
            r: sig.r,
            y: chain.y,
            yf,
            u,
            mode: sig.mode,
            active: Some(active),
            v: record_v.then_some(sig.v),
            nominal: ctrls[active].state().xu,
            uff: 0.0,
            loops,
        });
        previous_active = active;
        u_prev = u;
        v_prev = sig.v;
    }
    Ok(traj)
}

/// Gain scheduling with a single controller whose `(kp, ki)` pair is swapped
/// in one update whenever the zone changes.
pub fn run_gain_scheduling_single(s: &Scenario) -> Result<Trajectory, ScenarioError> {
    s.validate()?;
    let zones = zones_of(s)?;
    let mut base = s.controller;
    let mut zone = zone_index(zones, s.initial.y).0;
    let mut ctrl = Controller::new(zone_config(&base, &zones[zone]))?;
    ctrl.initialize(s.initial.r, s.initial.y, s.initial.u);
    let mut chain = ProcessChain::new(s, s.noise.seed, true);
    let record_v = has_disturbance(s);
    let mut sig = LoopSignals {
        r: s.initial.r,
        mode: s.initial.mode,
        uman: s.initial.uman,
        v: s.initial.v,
    };
    let mut cursor = EventCursor::new(&s.events, s.dt);
    let (mut u_prev, mut v_prev) = (s.initial.u, s.initial.v);
    let mut traj = Trajectory::default();

    for k in 0..=s.steps() {
        let t = time_at(k, s.dt);
        for e in cursor.due(t) {
            if let Some(cfg) = apply_signal_event(&mut sig, &e.action) {
                base = cfg;
                ctrl.set_params(zone_config(&base, &zones[zone]))?;
            }
        }
        if k > 0 {
            chain.advance(u_prev, v_prev);
        }
        let (_, yf) = chain.measure();
        let (current, inside) = zone_index(zones, yf);
        if !inside {
            traj.zone_clamps += 1;
        }
        if current != zone {
            zone = current;
            ctrl.set_params(zone_config(&base, &zones[zone]))?;
            traj.param_swaps.push(t);
        }
        let input = ControlInput {
            r: sig.r,
            y: yf,
            uff: 0.0,
            uman: sig.uman,
            utrack: 0.0,
            mode: sig.mode,
            dt: s.dt,
        };
        let u = ctrl.control(&input)?;
        traj.samples.push(Sample {
            t,
            r: sig.r,
            y: chain.y,
            yf,
            u,
            mode: sig.mode,
            active: Some(zone),
            v: record_v.then_some(sig.v),
            nominal: ctrl.state().xu,
            uff: 0.0,
            loops: Vec::new(),
        });
        u_prev = u;
        v_prev = sig.v;
    }
    Ok(traj)
}

/// Min-selector override control with two loops sharing one plant input.
///
/// Each step the controller selected last step runs in auto and the other one
/// tracks the applied input; the smaller output is applied and decides the
/// selection for the next step.
pub fn run_selector(s: &Scenario) -> Result<Trajectory, ScenarioError> {
    s.validate()?;
    let r2 = match s.layout {
        Layout::MinSelector { setpoint2 } => setpoint2,
        _ => {
            return Err(ScenarioError::Invalid(
                "scenario is not a selector layout".into(),
            ))
        }
    };
    let mut base = s.controller;
    let mut ctrls = [Controller::new(base)?, Controller::new(base)?];
    ctrls[0].initialize(s.initial.r, s.initial.y, s.initial.u);
    ctrls[1].initialize(r2, s.initial.y, s.initial.u);
    let mut chains = [
        ProcessChain::new(s, s.noise.seed, true),
        ProcessChain::new(s, s.noise.seed.wrapping_add(1), false),
    ];
    let mut sig = LoopSignals {
        r: s.initial.r,
        mode: s.initial.mode,
        uman: s.initial.uman,
        v: s.initial.v,
    };
    let mut cursor = EventCursor::new(&s.events, s.dt);
    let (mut u_prev, mut v_prev) = (s.initial.u, s.initial.v);
    let mut active = 0usize;
    let mut traj = Trajectory::default();

    for k in 0..=s.steps() {
        let t = time_at(k, s.dt);
        for e in cursor.due(t) {
            if let Some(cfg) = apply_signal_event(&mut sig, &e.action) {
                base = cfg;
                for c in ctrls.iter_mut() {
                    c.set_params(base)?;
                }
            }
        }
        if k > 0 {
            chains[0].advance(u_prev, v_prev);
            chains[1].advance(u_prev, 0.0);
        }
        let setpoints = [sig.r, r2];
        let mut loops = Vec::with_capacity(2);
        for i in 0..2 {
            let (_, yf) = chains[i].measure();
            let mode = match sig.mode {
                Mode::Auto if i != active => Mode::Track,
                other => other,
            };
            let input = ControlInput {
                r: setpoints[i],
                y: yf,
                uff: 0.0,
                uman: sig.uman,
                utrack: u_prev,
                mode,
                dt: s.dt,
            };
            let base_u = increment_base(&ctrls[i], &input);
            let out = ctrls[i].control(&input)?;
            loops.push(LoopRecord {
                r: setpoints[i],
                y: chains[i].y,
                yf,
                mode,
                output: out,
                increment: out - base_u,
            });
        }
        let u = loops[0].output.min(loops[1].output);
        let selected = if loops[0].output == loops[1].output {
            active
        } else if loops[0].output < loops[1].output {
            0
        } else {
            1
        };
        traj.samples.push(Sample {
            t,
            r: sig.r,
            y: chains[0].y,
            yf: loops[0].yf,
            u,
            mode: loops[active].mode,
            active: Some(active),
            v: Some(sig.v),
            nominal: ctrls[active].state().xu,
            uff: 0.0,
            loops,
        });
        active = selected;
        u_prev = u;
        v_prev = sig.v;
    }
    Ok(traj)
}

/// Per-example parameter overrides (`key=value`).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    entries: Vec<(String, String)>,
}

impl Overrides {
    pub fn new() -> Self {
        Overrides::default()
    }

    pub fn set(mut self, key: &str, value: impl ToString) -> Self {
        self.entries.push((key.to_string(), value.to_string()));
        self
    }

    /// Parses `key=value`.
    pub fn push_assignment(&mut self, text: &str) -> Result<(), ScenarioError> {
        let (k, v) = text
            .split_once('=')
            .ok_or_else(|| ScenarioError::Override {
                key: text.to_string(),
                value: String::new(),
                reason: "expected key=value".into(),
            })?;
        self.entries
            .push((k.trim().to_ascii_lowercase(), v.trim().to_string()));
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    fn last(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    fn number(&self, key: &str) -> Result<Option<f64>, ScenarioError> {
        self.last(key)
            .map(|v| parse_number(v).map_err(|reason| override_error(key, v, reason)))
            .transpose()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn override_error(key: &str, value: &str, reason: impl Into<String>) -> ScenarioError {
    ScenarioError::Override {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.into(),
    }
}

/// Parses a float, accepting `inf`, `+inf` and `-inf`.
pub fn parse_number(text: &str) -> Result<f64, String> {
    let t = text.trim();
    match t.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" => return Ok(f64::INFINITY),
        "-inf" | "-infinity" => return Ok(f64::NEG_INFINITY),
        _ => {}
    }
    let v: f64 = t.parse().map_err(|_| format!("not a number: {t:?}"))?;
    if v.is_nan() {
        return Err("NaN is not allowed".into());
    }
    Ok(v)
}

pub fn parse_anti_windup(text: &str) -> Result<AntiWindup, String> {
    match text.trim().to_ascii_lowercase().as_str() {
        "backcalc" | "back_calculation" | "backcalculation" | "bc" => {
            Ok(AntiWindup::BackCalculation)
        }
        "conditional" | "conditional_integration" | "combined" | "ci" => {
            Ok(AntiWindup::ConditionalIntegration)
        }
        "clamp" | "clamping" => Ok(AntiWindup::Clamping),
        other => Err(format!("unknown anti-windup mode {other:?}")),
    }
}

/// Applies one controller parameter assignment. Returns `Ok(false)` for keys
/// that are not controller parameters.
pub fn apply_param(cfg: &mut PidConfig, key: &str, value: &str) -> Result<bool, String> {
    if key == "aw" {
        cfg.aw_mode = parse_anti_windup(value)?;
        return Ok(true);
    }
    let slot = match key {
        "kp" => &mut cfg.kp,
        "ki" => &mut cfg.ki,
        "kd" => &mut cfg.kd,
        "b" => &mut cfg.b,
        "c" => &mut cfg.c,
        "u0" => &mut cfg.u0,
        "umin" => &mut cfg.umin,
        "umax" => &mut cfg.umax,
        "dumin" => &mut cfg.dumin,
        "dumax" => &mut cfg.dumax,
        "tt" => &mut cfg.tt,
        _ => return Ok(false),
    };
    *slot = parse_number(value)?;
    Ok(true)
}

/// Process time constant and gain of the example FOPDT loops.
pub const EXAMPLE_PLANT: FopdtParams = FopdtParams::new(1.0, 1.0, 0.5);
/// Lambda-tuned PI for [`EXAMPLE_PLANT`].
pub const EXAMPLE_KP: f64 = 0.667;
pub const EXAMPLE_KI: f64 = 0.667;

/// Gain-scheduling zones: `(lower, upper, K, Ti)`.
pub const TANK_ZONES: [(f64, f64, f64, f64); 3] = [
    (4.0, 12.0, 14.39, 16.36),
    (12.0, 20.0, 14.39, 28.34),
    (20.0, 25.0, 14.39, 36.59),
];

pub fn tank_zones() -> Vec<Zone> {
    TANK_ZONES
        .iter()
        .map(|&(lower, upper, k, ti)| Zone {
            lower,
            upper,
            kp: k,
            ki: k / ti,
        })
        .collect()
}

type ParamEdit = Box<dyn Fn(&mut PidConfig)>;

fn example_pi(dt: f64) -> PidConfig {
    PidConfig::pi(EXAMPLE_KP, EXAMPLE_KI, dt)
}

/// Builds the scenario for example `n` with `overrides` applied.
///
/// Override keys: every controller key (`kp`, `ki`, `kd`, `b`, `c`, `u0`,
/// `umin`, `umax`, `dumin`, `dumax`, `tt`, `aw`), `dt`, `duration`, `tf`,
/// `noise.sigma`, `noise.seed`, and `scheduling` (`parallel`/`single`) for
/// example 6. Controller overrides also apply to parameter-change events.
pub fn example(n: u32, overrides: &Overrides) -> Result<Scenario, ScenarioError> {
    let default_dt = if n == 6 { 0.1 } else { 0.01 };
    let dt = overrides.number("dt")?.unwrap_or(default_dt);
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(override_error("dt", &dt.to_string(), "dt must be > 0"));
    }

    let mut cfg = example_pi(dt);
    let mut s = Scenario::basic(&format!("example{n}"), EXAMPLE_PLANT, cfg, 10.0);
    s.dt = dt;

    // Parameter changes are built from `cfg` after overrides, see below.
    let mut param_events: Vec<(f64, ParamEdit)> = Vec::new();

    match n {
        1 => {
            s.duration = 20.0;
            s.initial = InitialConditions {
                r: 3.0,
                mode: Mode::Manual,
                ..InitialConditions::default()
            };
            s.events = vec![
                Event::new(1.0, Action::SetManual(1.0)),
                Event::new(10.0, Action::SetMode(Mode::Auto)),
            ];
        }
        2 => {
            s.duration = 30.0;
            cfg.u0 = 2.0;
            s.initial = InitialConditions {
                r: 1.0,
                y: 1.0,
                u: 1.0,
                mode: Mode::Auto,
                ..InitialConditions::default()
            };
            s.events = vec![
                Event::new(1.0, Action::SetSetpoint(3.0)),
                Event::new(15.0, Action::SetSetpoint(1.0)),
            ];
            param_events.push((10.0, Box::new(|c: &mut PidConfig| c.ki = 0.0)));
            param_events.push((21.0, Box::new(|c: &mut PidConfig| c.ki = EXAMPLE_KI)));
        }
        3 => {
            s.duration = 20.0;
            s.events = vec![
                Event::new(1.0, Action::SetSetpoint(1.0)),
                Event::new(10.0, Action::SetDisturbance(1.0)),
            ];
        }
        4 => {
            s.duration = 70.0;
            let (kp, ti, td) = (2.83, 3.25, 0.23);
            cfg.kp = kp;
            cfg.ki = kp / ti;
            cfg.kd = kp * td;
            cfg.b = 0.0;
            cfg.umin = -3.0;
            cfg.umax = 3.0;
            cfg.tt = ti;
            s.plant = PlantSpec::Fopdt(FopdtParams::new(1.0, 3.0, 0.5));
            s.disturbance = DisturbancePath::Model(FopdtParams::new(2.0, 1.0, 0.5));
            s.feedforward = Some(LeadLagParams {
                gain: -2.0,
                lead: 3.0,
                lag: 1.0,
            });
            s.events = vec![
                Event::new(1.0, Action::SetSetpoint(4.5)),
                Event::new(20.0, Action::SetSetpoint(0.0)),
                Event::new(45.0, Action::SetDisturbance(1.5)),
            ];
        }
        5 => {
            s.duration = 10.0;
            s.tf = 0.1 * (EXAMPLE_KP / EXAMPLE_KI);
            s.noise = NoiseSpec {
                sigma: 0.05,
                seed: 42,
            };
            s.initial = InitialConditions {
                mode: Mode::Manual,
                ..InitialConditions::default()
            };
            s.events = vec![
                Event::new(1.0, Action::SetSetpoint(3.0)),
                Event::new(1.25, Action::SetMode(Mode::Auto)),
            ];
        }
        6 => {
            s.duration = 2000.0;
            let zones = tank_zones();
            cfg.kp = zones[0].kp;
            cfg.ki = zones[0].ki;
            cfg.umin = 0.0;
            s.plant = PlantSpec::Tank(TankParams::default());
            s.initial = InitialConditions {
                r: 22.0,
                y: 4.0,
                u: 190.66,
                mode: Mode::Auto,
                ..InitialConditions::default()
            };
            s.events = vec![
                Event::new(500.0, Action::SetSetpoint(8.0)),
                Event::new(1000.0, Action::SetSetpoint(16.0)),
                Event::new(1500.0, Action::SetSetpoint(24.0)),
            ];
            let scheduling = match overrides.last("scheduling") {
                None | Some("parallel") => Scheduling::Parallel,
                Some("single") => Scheduling::Single,
                Some(other) => {
                    return Err(override_error(
                        "scheduling",
                        other,
                        "expected parallel or single",
                    ))
                }
            };
            s.layout = Layout::GainScheduling { zones, scheduling };
        }
        7 => {
            s.duration = 40.0;
            s.initial = InitialConditions {
                r: 0.3,
                ..InitialConditions::default()
            };
            s.layout = Layout::MinSelector { setpoint2: 0.5 };
            s.events = vec![
                Event::new(10.0, Action::SetDisturbance(-0.4)),
                Event::new(20.0, Action::SetDisturbance(0.4)),
                Event::new(30.0, Action::SetDisturbance(-0.4)),
            ];
        }
        other => return Err(ScenarioError::UnknownExample(other)),
    }

    // Clamping anti-windup follows the sample time unless tt is overridden.
    let clamping = cfg.tt == cfg.dt_nominal;
    cfg.dt_nominal = dt;
    if clamping {
        cfg.tt = dt;
    }
    for (key, value) in overrides.iter() {
        match key {
            "dt" | "scheduling" => {}
            "duration" => {
                s.duration = parse_number(value).map_err(|e| override_error(key, value, e))?
            }
            "tf" => s.tf = parse_number(value).map_err(|e| override_error(key, value, e))?,
            "noise.sigma" | "sigma" => {
                s.noise.sigma = parse_number(value).map_err(|e| override_error(key, value, e))?
            }
            "noise.seed" | "seed" => {
                s.noise.seed = value
                    .parse()
                    .map_err(|_| override_error(key, value, "expected an unsigned integer"))?
            }
            _ => {
                if !apply_param(&mut cfg, key, value).map_err(|e| override_error(key, value, e))? {
                    return Err(override_error(key, value, "unknown key"));
                }
            }
        }
    }
    s.controller = cfg;
    for (time, change) in param_events {
        let mut changed = cfg;
        change(&mut changed);
        s.events.push(Event::new(time, Action::SetParams(changed)));
    }
    s.events
        .sort_by(|a, b| a.time.partial_cmp(&b.time).expect("finite event times"));
    s.validate()?;
    Ok(s)
}
