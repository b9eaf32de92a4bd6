//! Experiment harness for the `chambolle-pock` certificate engine: TOML
//! configs, certified runs, parameter sweeps, CSV/JSON output, rate fits and
//! plot data. The `cpock` binary is a thin front end over this crate.

pub mod config;
mod error;
pub mod experiment;
pub mod plotdata;
pub mod rate;
pub mod sweep;
pub mod trajectory;

pub use config::{ExperimentConfig, Overrides};
pub use error::{HarnessError, Result};
pub use experiment::{Outcome, Prepared, RunResult, Summary};
