//! Config-driven pipeline around the `christoffel` crate: admissibility
//! checks, solving, verification, geometry export and the scalar curvature
//! transform. Every emitted file is hashed into the run report.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;

pub use commands::{cmd_check, cmd_nirenberg, cmd_reconstruct, cmd_solve, cmd_verify, RunOptions};
pub use config::RunConfig;
pub use error::{CliError, CliResult};
pub use report::{RunReport, RunStatus};
