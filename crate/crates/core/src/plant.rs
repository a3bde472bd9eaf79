//! Discrete-time process and disturbance models used by the example loops.

use std::collections::VecDeque;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Parameters of `k * exp(-s*l) / (1 + s*t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FopdtParams {
    pub k: f64,
    pub t: f64,
    pub l: f64,
}

impl FopdtParams {
    pub const fn new(k: f64, t: f64, l: f64) -> Self {
        FopdtParams { k, t, l }
    }
}

/// First-order-plus-dead-time process, exact zero-order-hold discretisation
/// with an integer sample delay of `round(l/dt)`.
#[derive(Debug, Clone)]
pub struct Fopdt {
    params: FopdtParams,
    dt: f64,
    phi: f64,
    y: f64,
    delay: VecDeque<f64>,
}

impl Fopdt {
    /// Builds the model at rest (`y = 0`, zero input history).
    pub fn new(params: FopdtParams, dt: f64) -> Self {
        Self::at_operating_point(params, dt, 0.0, 0.0)
    }

    /// Builds the model with output `y0` and an input history filled with
    /// `u0`.
    pub fn at_operating_point(params: FopdtParams, dt: f64, y0: f64, u0: f64) -> Self {
        assert!(params.t > 0.0, "time constant must be > 0");
        assert!(params.l >= 0.0, "dead time must be >= 0");
        assert!(dt > 0.0, "dt must be > 0");
        let n = (params.l / dt).round() as usize;
        Fopdt {
            params,
            dt,
            phi: (-dt / params.t).exp(),
            y: y0,
            delay: std::iter::repeat_n(u0, n).collect(),
        }
    }

    pub fn params(&self) -> &FopdtParams {
        &self.params
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn delay_samples(&self) -> usize {
        self.delay.len()
    }

    pub fn output(&self) -> f64 {
        self.y
    }

    /// Holds `u` for one sample period and returns the output at the end of it.
    pub fn step(&mut self, u: f64) -> f64 {
        let delayed = if self.delay.is_empty() {
            u
        } else {
            self.delay.push_back(u);
            self.delay.pop_front().unwrap_or(0.0)
        };
        self.y = self.phi * self.y + (1.0 - self.phi) * self.params.k * delayed;
        self.y
    }
}

/// Tank geometry and constants (cm, s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TankParams {
    /// Gravity, cm/s^2.
    pub g: f64,
    /// Outlet cross section, cm^2.
    pub outlet: f64,
    /// Tank cross section, cm^2.
    pub area: f64,
}

impl Default for TankParams {
    fn default() -> Self {
        TankParams {
            g: 983.0,
            outlet: 2.15,
            area: 390.0,
        }
    }
}

impl TankParams {
    /// Inflow that keeps the level constant at `y`.
    pub fn equilibrium_inflow(&self, y: f64) -> f64 {
        self.outlet * (2.0 * self.g * y.max(0.0)).sqrt()
    }

    /// `dy/dt` for level `y` and inflow `u`.
    pub fn derivative(&self, y: f64, u: f64) -> f64 {
        -(self.outlet / self.area) * (2.0 * self.g * y.max(0.0)).sqrt() + u / self.area
    }

    /// Time constant of the model linearised around level `y0`.
    pub fn linearized_time_constant(&self, y0: f64) -> f64 {
        (self.area / self.outlet) * (2.0 * y0 / self.g).sqrt()
    }

    /// Static gain of the model linearised around level `y0`.
    pub fn linearized_gain(&self, y0: f64) -> f64 {
        self.linearized_time_constant(y0) / self.area
    }
}

/// Nonlinear gravity-drained tank, integrated with classic RK4 at the sample
/// period.
#[derive(Debug, Clone)]
pub struct Tank {
    params: TankParams,
    dt: f64,
    y: f64,
}

impl Tank {
    pub fn new(params: TankParams, dt: f64, y0: f64) -> Self {
        assert!(dt > 0.0, "dt must be > 0");
        Tank {
            params,
            dt,
            y: y0.max(0.0),
        }
    }

    pub fn params(&self) -> &TankParams {
        &self.params
    }

    pub fn output(&self) -> f64 {
        self.y
    }

    pub fn step(&mut self, u: f64) -> f64 {
        let f = |y: f64| self.params.derivative(y, u);
        let h = self.dt;
        let y = self.y;
        let k1 = f(y);
        let k2 = f(y + 0.5 * h * k1);
        let k3 = f(y + 0.5 * h * k2);
        let k4 = f(y + h * k3);
        self.y = (y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)).max(0.0);
        self.y
    }
}

/// Parameters of `gain * (1 + s*lead) / (1 + s*lag)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeadLagParams {
    pub gain: f64,
    pub lead: f64,
    pub lag: f64,
}

/// Tustin realisation of a lead-lag compensator (transposed direct form II,
/// one state).
#[derive(Debug, Clone)]
pub struct LeadLag {
    params: LeadLagParams,
    b0: f64,
    b1: f64,
    a1: f64,
    state: f64,
}

impl LeadLag {
    pub fn new(params: LeadLagParams, dt: f64) -> Self {
        assert!(dt > 0.0, "dt must be > 0");
        let w = 2.0 / dt;
        let den = 1.0 + params.lag * w;
        LeadLag {
            params,
            b0: params.gain * (1.0 + params.lead * w) / den,
            b1: params.gain * (1.0 - params.lead * w) / den,
            a1: (1.0 - params.lag * w) / den,
            state: 0.0,
        }
    }

    pub fn params(&self) -> &LeadLagParams {
        &self.params
    }

    /// Sets the state so that a constant input `v0` produces a constant output.
    pub fn settle(&mut self, v0: f64) {
        let y0 = self.params.gain * v0;
        self.state = self.b1 * v0 - self.a1 * y0;
    }

    pub fn step(&mut self, v: f64) -> f64 {
        let y = self.b0 * v + self.state;
        self.state = self.b1 * v - self.a1 * y;
        y
    }
}

/// Reproducible Gaussian white noise.
#[derive(Debug, Clone)]
pub struct NoiseSource {
    sigma: f64,
    seed: u64,
    rng: ChaCha8Rng,
}

impl NoiseSource {
    pub fn new(sigma: f64, seed: u64) -> Self {
        assert!(sigma >= 0.0 && sigma.is_finite(), "sigma must be >= 0");
        NoiseSource {
            sigma,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_sample(&mut self) -> f64 {
        if self.sigma == 0.0 {
            return 0.0;
        }
        let z: f64 = StandardNormal.sample(&mut self.rng);
        self.sigma * z
    }
}
