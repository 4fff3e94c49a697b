//! Scenario-driven front end for the `deltashock` solvers: JSON scenarios
//! in, CSV time series, JSON reports and SVG plots out.

pub mod error;
pub mod runner;
pub mod scenario;
pub mod svg;

pub use error::{CliError, Result};
pub use runner::{as_verification, run_scenario, sweep, Outcome, RunOptions, SweepReport};
pub use scenario::{parse_scenario, Scenario};
