//! Command-line front end for `sjj-core`: single evaluations, closed-form
//! limits, probe optimisation and reproducible parameter sweeps written as
//! CSV with a JSON metadata sidecar.

pub mod commands;
pub mod config;
pub mod error;
pub mod sweep;

pub use config::{Grid, ProbeKind, SweepConfig, SweepPlan};
pub use error::{CliError, CliResult};
pub use sweep::{run_plan, run_sweep, SweepRow};
