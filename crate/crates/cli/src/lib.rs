//! Config-driven experiments on top of [`hmmem`]: simulation, posterior and
//! risk evaluation, bound reports, kernel-rule error rates and the
//! three-model simulation table.

pub mod config;
pub mod csv_io;
pub mod error;
pub mod experiments;
pub mod run;
pub mod table;

pub use config::{ExperimentConfig, Task};
pub use error::{CliError, CliResult};
pub use run::{execute, run, Report};
pub use table::ResultTable;
