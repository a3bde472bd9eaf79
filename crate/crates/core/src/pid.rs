//! Combined positional/incremental PID controller.
//!
//! With integral action (`ki > 0`) the controller runs in incremental form and
//! stores its integral state in the nominal control signal `xu`. Without
//! integral action it falls back to the positional form with a bias term `u0`.
//! Amplitude and rate limits are merged into one admissible interval per
//! invocation, and anti-windup acts on the distance between the nominal and the
//! saturated signal.

use std::fmt;

use thiserror::Error;

/// Errors raised by the controller and its configuration.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PidError {
    /// A configuration field violates its invariant.
    #[error("invalid controller configuration: {field} ({reason})")]
    ConfigInvalid {
        field: &'static str,
        reason: &'static str,
    },
    /// `control` was called before `initialize`.
    #[error("controller used before initialize")]
    NotInitialized,
    /// A mode encoding outside the four defined values.
    #[error("invalid mode encoding {0:#04b}")]
    InvalidMode(u8),
    /// A per-invocation input violates its invariant.
    #[error("invalid control input: {field} ({reason})")]
    InvalidInput {
        field: &'static str,
        reason: &'static str,
    },
}

/// Operating mode with its 2-bit wire encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Mode {
    Disabled = 0b00,
    Manual = 0b01,
    Auto = 0b10,
    Track = 0b11,
}

impl Mode {
    pub const fn bits(self) -> u8 {
        self as u8
    }

    /// Decodes a 2-bit mode. Anything else is rejected; there is no fallback
    /// to `Auto`.
    pub fn from_bits(bits: u8) -> Result<Self, PidError> {
        match bits {
            0b00 => Ok(Mode::Disabled),
            0b01 => Ok(Mode::Manual),
            0b10 => Ok(Mode::Auto),
            0b11 => Ok(Mode::Track),
            other => Err(PidError::InvalidMode(other)),
        }
    }

    /// Parses the textual names used in config files (`AUTO`, `MAN`, `TRACK`,
    /// `DISABLED`) as well as the numeric encodings (`2`, `0b10`).
    pub fn parse(text: &str) -> Result<Self, PidError> {
        let t = text.trim();
        match t.to_ascii_uppercase().as_str() {
            "DISABLED" | "OFF" => return Ok(Mode::Disabled),
            "MAN" | "MANUAL" => return Ok(Mode::Manual),
            "AUTO" | "AUTOMATIC" => return Ok(Mode::Auto),
            "TRACK" | "TRACKING" => return Ok(Mode::Track),
            _ => {}
        }
        let parsed = if let Some(bin) = t.strip_prefix("0b") {
            u8::from_str_radix(bin, 2).ok()
        } else {
            t.parse::<u8>().ok()
        };
        match parsed {
            Some(bits) => Mode::from_bits(bits),
            None => Err(PidError::InvalidMode(u8::MAX)),
        }
    }
}

impl TryFrom<u8> for Mode {
    type Error = PidError;

    fn try_from(bits: u8) -> Result<Self, Self::Error> {
        Mode::from_bits(bits)
    }
}

impl From<Mode> for u8 {
    fn from(mode: Mode) -> u8 {
        mode.bits()
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Mode::Disabled => "DISABLED",
            Mode::Manual => "MAN",
            Mode::Auto => "AUTO",
            Mode::Track => "TRACK",
        };
        f.write_str(name)
    }
}

/// Anti-windup strategy used in the incremental branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AntiWindup {
    /// Saturation error decays with time constant `tt`. `tt == dt` gives
    /// control signal clamping, `tt == inf` disables anti-windup.
    #[default]
    BackCalculation,
    /// Integrate to the limit, keep integration away from saturation, then
    /// back-calculate the remainder. With `tt == inf` this is integrator
    /// clamping.
    ConditionalIntegration,
    /// Nominal signal replaced by the saturated one, ignoring `tt`.
    Clamping,
}

/// Controller parameters.
///
/// Gains use the linear parameterisation `kp = K`, `ki = K/Ti`, `kd = K*Td`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidConfig {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// Setpoint weight in the proportional term.
    pub b: f64,
    /// Setpoint weight in the derivative term.
    pub c: f64,
    /// Bias used by the positional branch (`ki == 0`).
    pub u0: f64,
    pub umin: f64,
    pub umax: f64,
    /// Lower rate limit, units per second (`<= 0`).
    pub dumin: f64,
    /// Upper rate limit, units per second (`>= 0`).
    pub dumax: f64,
    /// Anti-windup time constant. May be `f64::INFINITY`.
    pub tt: f64,
    pub dt_nominal: f64,
    pub aw_mode: AntiWindup,
}

impl PidConfig {
    /// A PI controller (`kd = 0`, `b = 1`, `c = 0`) without limits, with
    /// clamping anti-windup (`tt = dt`).
    pub fn pi(kp: f64, ki: f64, dt: f64) -> Self {
        PidConfig {
            kp,
            ki,
            kd: 0.0,
            b: 1.0,
            c: 0.0,
            u0: 0.0,
            umin: f64::NEG_INFINITY,
            umax: f64::INFINITY,
            dumin: f64::NEG_INFINITY,
            dumax: f64::INFINITY,
            tt: dt,
            dt_nominal: dt,
            aw_mode: AntiWindup::BackCalculation,
        }
    }

    pub fn with_limits(mut self, umin: f64, umax: f64) -> Self {
        self.umin = umin;
        self.umax = umax;
        self
    }

    pub fn with_rate_limits(mut self, dumin: f64, dumax: f64) -> Self {
        self.dumin = dumin;
        self.dumax = dumax;
        self
    }

    pub fn validate(&self) -> Result<(), PidError> {
        fn invalid(field: &'static str, reason: &'static str) -> Result<(), PidError> {
            Err(PidError::ConfigInvalid { field, reason })
        }
        for (field, v) in [
            ("kp", self.kp),
            ("ki", self.ki),
            ("kd", self.kd),
            ("b", self.b),
            ("c", self.c),
            ("u0", self.u0),
            ("dt", self.dt_nominal),
        ] {
            if !v.is_finite() {
                return invalid(field, "must be finite");
            }
        }
        for (field, v) in [
            ("umin", self.umin),
            ("umax", self.umax),
            ("dumin", self.dumin),
            ("dumax", self.dumax),
            ("tt", self.tt),
        ] {
            if v.is_nan() {
                return invalid(field, "must not be NaN");
            }
        }
        if self.umin > self.umax {
            return invalid("umax", "umin <= umax required");
        }
        if self.umin == f64::INFINITY {
            return invalid("umin", "must be below +inf");
        }
        if self.umax == f64::NEG_INFINITY {
            return invalid("umax", "must be above -inf");
        }
        if self.dumin > 0.0 {
            return invalid("dumin", "dumin <= 0 required");
        }
        if self.dumax < 0.0 {
            return invalid("dumax", "dumax >= 0 required");
        }
        if self.dt_nominal <= 0.0 {
            return invalid("dt", "dt > 0 required");
        }
        if !(0.0..=1.0).contains(&self.b) {
            return invalid("b", "0 <= b <= 1 required");
        }
        if !(0.0..=1.0).contains(&self.c) {
            return invalid("c", "0 <= c <= 1 required");
        }
        if self.ki < 0.0 {
            return invalid("ki", "ki >= 0 required");
        }
        if self.tt < self.dt_nominal {
            return invalid("tt", "tt >= dt required");
        }
        Ok(())
    }
}

/// States persisted between invocations.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PidState {
    /// Previous setpoint.
    pub xr: f64,
    /// Previous process variable.
    pub xy: f64,
    /// Previous nominal (unsaturated) control signal.
    pub xu: f64,
    /// Previous saturated (applied) control signal.
    pub xus: f64,
    /// Previous process variable derivative.
    pub xdy: f64,
    /// Previous setpoint derivative.
    pub xdr: f64,
    /// Previous feed-forward signal.
    pub xuff: f64,
}

/// Signals passed to one `control` invocation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlInput {
    pub r: f64,
    /// Process variable, already filtered.
    pub y: f64,
    pub uff: f64,
    pub uman: f64,
    pub utrack: f64,
    pub mode: Mode,
    /// Time elapsed since the previous invocation.
    pub dt: f64,
}

impl ControlInput {
    /// Automatic-mode input with no feed-forward.
    pub fn auto(r: f64, y: f64, dt: f64) -> Self {
        ControlInput {
            r,
            y,
            uff: 0.0,
            uman: 0.0,
            utrack: 0.0,
            mode: Mode::Auto,
            dt,
        }
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_uff(mut self, uff: f64) -> Self {
        self.uff = uff;
        self
    }

    pub fn with_uman(mut self, uman: f64) -> Self {
        self.uman = uman;
        self
    }

    pub fn with_utrack(mut self, utrack: f64) -> Self {
        self.utrack = utrack;
        self
    }

    fn validate(&self) -> Result<(), PidError> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(PidError::InvalidInput {
                field: "dt",
                reason: "dt must be finite and > 0",
            });
        }
        for (field, v) in [
            ("r", self.r),
            ("y", self.y),
            ("uff", self.uff),
            ("uman", self.uman),
            ("utrack", self.utrack),
        ] {
            if !v.is_finite() {
                return Err(PidError::InvalidInput {
                    field,
                    reason: "signal must be finite",
                });
            }
        }
        Ok(())
    }
}

/// Admissible output interval after merging amplitude limits with the rate
/// limits around the previous applied output `xus`.
///
/// If `xus` lies outside `[umin, umax]` (limits narrowed by a parameter
/// update) the amplitude limits win and the interval collapses onto the
/// nearest amplitude limit.
pub fn saturation_bounds(xus: f64, dt: f64, config: &PidConfig) -> (f64, f64) {
    let usmin = config.umin.max(xus + dt * config.dumin);
    let usmax = config.umax.min(xus + dt * config.dumax);
    if usmin <= usmax {
        (usmin, usmax)
    } else if xus > config.umax {
        (config.umax, config.umax)
    } else {
        (config.umin, config.umin)
    }
}

/// Saturates `u` into `[usmin, usmax]`; the upper bound is checked first.
pub fn saturate(u: f64, usmin: f64, usmax: f64) -> f64 {
    if u > usmax {
        usmax
    } else if u < usmin {
        usmin
    } else {
        u
    }
}

/// Lets the saturation error `u - us` decay one explicit-Euler step with time
/// constant `tt`.
///
/// `tt == dt` returns `us` exactly, `tt == inf` returns `u` unchanged. The
/// decay factor is floored at zero for invocations with `dt > tt`.
pub fn back_calculation(u: f64, us: f64, dt: f64, tt: f64) -> f64 {
    if u == us {
        return u;
    }
    let keep = (1.0 - dt / tt).max(0.0);
    us + (u - us) * keep
}

/// Combined anti-windup: integrate up to the limit, allow integration away
/// from saturation, then back-calculate what is left.
pub fn conditional_integration(u: f64, dui: f64, usmin: f64, usmax: f64, dt: f64, tt: f64) -> f64 {
    let mut u = u;
    if u > usmax && dui > 0.0 {
        u -= dui.min(u - usmax);
    } else if u < usmin && dui < 0.0 {
        u -= dui.max(u - usmin);
    }
    back_calculation(u, saturate(u, usmin, usmax), dt, tt)
}

/// Combined-form PID controller instance.
///
/// `control` and `set_params` both take `&mut self`, so a parameter swap can
/// never interleave with an invocation. Callers sharing a controller across
/// threads wrap it in a lock and take it for the whole `control` call.
#[derive(Debug, Clone)]
pub struct Controller {
    config: PidConfig,
    state: PidState,
    initialized: bool,
}

impl Controller {
    pub fn new(config: PidConfig) -> Result<Self, PidError> {
        config.validate()?;
        Ok(Controller {
            config,
            state: PidState::default(),
            initialized: false,
        })
    }

    /// Sets the states from the latest available signals. `u_actuator` is the
    /// value the actuator is expected to hold at startup.
    pub fn initialize(&mut self, r0: f64, y0: f64, u_actuator: f64) {
        self.state = PidState {
            xr: r0,
            xy: y0,
            xu: u_actuator,
            xus: saturate(u_actuator, self.config.umin, self.config.umax),
            xdy: 0.0,
            xdr: 0.0,
            xuff: 0.0,
        };
        self.initialized = true;
    }

    pub fn is_initialized(&self) -> bool {
        self.initialized
    }

    pub fn config(&self) -> &PidConfig {
        &self.config
    }

    pub fn state(&self) -> &PidState {
        &self.state
    }

    /// Replaces the whole parameter set at once.
    pub fn set_params(&mut self, config: PidConfig) -> Result<(), PidError> {
        config.validate()?;
        self.config = config;
        Ok(())
    }

    /// Runs one controller invocation and returns the applied control signal.
    pub fn control(&mut self, input: &ControlInput) -> Result<f64, PidError> {
        if !self.initialized {
            return Err(PidError::NotInitialized);
        }
        input.validate()?;
        if input.mode == Mode::Disabled {
            return Ok(self.state.xus);
        }

        let cfg = self.config;
        let st = &mut self.state;
        let dt = input.dt;
        let (r, y) = (input.r, input.y);

        let (usmin, usmax) = saturation_bounds(st.xus, dt, &cfg);

        let dy = (y - st.xy) / dt;
        let dr = (r - st.xr) / dt;

        if input.mode == Mode::Track {
            st.xu = input.utrack;
        }

        let u = if input.mode == Mode::Manual {
            input.uman
        } else if cfg.ki == 0.0 {
            cfg.u0 + cfg.kp * (cfg.b * r - y) + cfg.kd * (cfg.c * dr - dy) + input.uff
        } else {
            let d_r = r - st.xr;
            let d_y = y - st.xy;
            let d_dr = dr - st.xdr;
            let d_dy = dy - st.xdy;
            let dup = cfg.kp * (cfg.b * d_r - d_y);
            let dui = cfg.ki * dt * (r - y);
            let dud = cfg.kd * (cfg.c * d_dr - d_dy);
            let duff = input.uff - st.xuff;
            let u = st.xu + dup + dui + dud + duff;

            match cfg.aw_mode {
                AntiWindup::BackCalculation => {
                    back_calculation(u, saturate(u, usmin, usmax), dt, cfg.tt)
                }
                AntiWindup::ConditionalIntegration => {
                    conditional_integration(u, dui, usmin, usmax, dt, cfg.tt)
                }
                AntiWindup::Clamping => saturate(u, usmin, usmax),
            }
        };

        st.xu = u;
        let us = saturate(u, usmin, usmax);

        st.xus = us;
        st.xr = r;
        st.xy = y;
        st.xdy = dy;
        st.xdr = dr;
        st.xuff = input.uff;
        Ok(us)
    }
}
