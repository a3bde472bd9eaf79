//! PID control in combined positional/incremental form, with anti-windup,
//! bumpless mode changes, process-variable filtering, simple process models
//! and a closed-loop simulation harness.

pub mod cli;
pub mod config;
pub mod filter;
pub mod output;
pub mod pid;
pub mod plant;
pub mod scenario;

pub use filter::{FilterOrder, FilterState};
pub use pid::{AntiWindup, ControlInput, Controller, Mode, PidConfig, PidError, PidState};
pub use plant::{Fopdt, FopdtParams, LeadLag, LeadLagParams, NoiseSource, Tank, TankParams};
pub use scenario::{example, run, Overrides, Scenario, ScenarioError, Trajectory};
