//! Plain `key=value` scenario files.
//!
//! ```text
//! # PI loop on a first-order plant with dead time
//! kp = 0.667
//! ki = 0.667
//! plant.k = 1
//! plant.t = 1
//! plant.l = 0.5
//! duration = 20
//! init.mode = MAN
//! at 1 set uman 1
//! at 10 set mode AUTO
//! ```
//!
//! Event keys: `r`, `mode`, `uman`, `v` and every controller key.

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::pid::{Mode, PidConfig};
use crate::plant::FopdtParams;
use crate::scenario::{
    apply_param, parse_number, Action, Event, Overrides, Scenario, ScenarioError,
};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl From<ScenarioError> for ConfigError {
    fn from(e: ScenarioError) -> Self {
        ConfigError::Validation(e.to_string())
    }
}

/// Keys accepted at top level, besides the controller keys.
const SCENARIO_KEYS: &[&str] = &[
    "dt",
    "tf",
    "duration",
    "plant.k",
    "plant.t",
    "plant.l",
    "noise.sigma",
    "noise.seed",
    "init.r",
    "init.y",
    "init.u",
    "init.mode",
    "init.uman",
    "init.v",
];

const CONTROLLER_KEYS: &[&str] = &[
    "kp", "ki", "kd", "b", "c", "u0", "umin", "umax", "dumin", "dumax", "tt", "aw",
];

const EVENT_SIGNAL_KEYS: &[&str] = &["r", "mode", "uman", "v"];

#[derive(Debug, Clone)]
struct Assignment {
    line: usize,
    key: String,
    value: String,
}

#[derive(Debug, Clone)]
struct EventLine {
    line: usize,
    time: f64,
    key: String,
    value: String,
}

fn parse_error(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError::Parse {
        line,
        message: message.into(),
    }
}

fn number_at(line: usize, key: &str, value: &str) -> Result<f64, ConfigError> {
    parse_number(value).map_err(|e| parse_error(line, format!("{key}: {e}")))
}

fn split_lines(text: &str) -> Result<(Vec<Assignment>, Vec<EventLine>), ConfigError> {
    let mut assignments = Vec::new();
    let mut events: Vec<EventLine> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix("at ") {
            let words: Vec<&str> = rest.split_whitespace().collect();
            let [time, set, key, value] = words[..] else {
                return Err(parse_error(line, "expected `at <time> set <key> <value>`"));
            };
            if set != "set" {
                return Err(parse_error(line, "expected `set` after the event time"));
            }
            let key = key.to_ascii_lowercase();
            if !EVENT_SIGNAL_KEYS.contains(&key.as_str())
                && !CONTROLLER_KEYS.contains(&key.as_str())
            {
                return Err(parse_error(line, format!("unknown event key {key:?}")));
            }
            let time = number_at(line, "time", time)?;
            if !time.is_finite() {
                return Err(parse_error(line, "event time must be finite"));
            }
            if let Some(prev) = events.last() {
                if time < prev.time {
                    return Err(parse_error(
                        line,
                        format!(
                            "event at t={time} precedes the previous event at t={}",
                            prev.time
                        ),
                    ));
                }
            }
            events.push(EventLine {
                line,
                time,
                key,
                value: value.to_string(),
            });
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            return Err(parse_error(line, "expected `key=value` or an event line"));
        };
        let key = key.trim().to_ascii_lowercase();
        if !SCENARIO_KEYS.contains(&key.as_str()) && !CONTROLLER_KEYS.contains(&key.as_str()) {
            return Err(parse_error(line, format!("unknown key {key:?}")));
        }
        assignments.push(Assignment {
            line,
            key,
            value: value.trim().to_string(),
        });
    }
    Ok((assignments, events))
}

/// Parses scenario text. `overrides` are applied after the file's own
/// assignments, as if appended to it.
pub fn parse_config_str(text: &str, overrides: &Overrides) -> Result<Scenario, ConfigError> {
    let (mut assignments, events) = split_lines(text)?;
    for (key, value) in overrides.iter() {
        let key = match key {
            "seed" => "noise.seed",
            "sigma" => "noise.sigma",
            other => other,
        };
        if !SCENARIO_KEYS.contains(&key) && !CONTROLLER_KEYS.contains(&key) {
            return Err(ConfigError::Validation(format!(
                "unknown override key {key:?}"
            )));
        }
        assignments.push(Assignment {
            line: 0,
            key: key.to_string(),
            value: value.to_string(),
        });
    }

    let mut dt = 0.01;
    let mut tt = None;
    let mut cfg = PidConfig::pi(0.0, 0.0, dt);
    let mut plant = FopdtParams::new(1.0, 1.0, 0.0);
    let mut s = Scenario::basic("config", plant, cfg, 10.0);
    for a in &assignments {
        let (line, key, value) = (a.line, a.key.as_str(), a.value.as_str());
        match key {
            "dt" => dt = number_at(line, key, value)?,
            "tt" => tt = Some(number_at(line, key, value)?),
            "tf" => s.tf = number_at(line, key, value)?,
            "duration" => s.duration = number_at(line, key, value)?,
            "plant.k" => plant.k = number_at(line, key, value)?,
            "plant.t" => plant.t = number_at(line, key, value)?,
            "plant.l" => plant.l = number_at(line, key, value)?,
            "noise.sigma" => s.noise.sigma = number_at(line, key, value)?,
            "noise.seed" => {
                s.noise.seed = value.parse().map_err(|_| {
                    parse_error(line, format!("{key}: expected an unsigned integer"))
                })?
            }
            "init.r" => s.initial.r = number_at(line, key, value)?,
            "init.y" => s.initial.y = number_at(line, key, value)?,
            "init.u" => s.initial.u = number_at(line, key, value)?,
            "init.uman" => s.initial.uman = number_at(line, key, value)?,
            "init.v" => s.initial.v = number_at(line, key, value)?,
            "init.mode" => {
                s.initial.mode =
                    Mode::parse(value).map_err(|e| parse_error(line, format!("{key}: {e}")))?
            }
            _ => {
                apply_param(&mut cfg, key, value)
                    .map_err(|e| parse_error(line, format!("{key}: {e}")))?;
            }
        }
    }
    cfg.dt_nominal = dt;
    cfg.tt = tt.unwrap_or(dt);
    s.dt = dt;
    s.plant = crate::scenario::PlantSpec::Fopdt(plant);
    s.controller = cfg;

    // Parameter events accumulate on top of the base configuration.
    let mut current = cfg;
    for e in &events {
        let action = match e.key.as_str() {
            "r" => Action::SetSetpoint(number_at(e.line, "r", &e.value)?),
            "v" => Action::SetDisturbance(number_at(e.line, "v", &e.value)?),
            "uman" => Action::SetManual(number_at(e.line, "uman", &e.value)?),
            "mode" => Action::SetMode(
                Mode::parse(&e.value).map_err(|err| parse_error(e.line, format!("mode: {err}")))?,
            ),
            key => {
                apply_param(&mut current, key, &e.value)
                    .map_err(|err| parse_error(e.line, format!("{key}: {err}")))?;
                current
                    .validate()
                    .map_err(|err| ConfigError::Validation(format!("line {}: {err}", e.line)))?;
                Action::SetParams(current)
            }
        };
        s.events.push(Event::new(e.time, action));
    }
    s.validate()?;
    Ok(s)
}

/// Reads and parses a scenario file.
pub fn parse_config(
    path: impl AsRef<Path>,
    overrides: &Overrides,
) -> Result<Scenario, ConfigError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config_str(&text, overrides)
}
