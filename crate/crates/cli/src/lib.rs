//! Scenario files, run orchestration and table export for the vwlab
//! laboratory.

pub mod analyses;
pub mod error;
pub mod export;
pub mod run;
pub mod scenario;
pub mod tables;

pub use error::CliError;
pub use export::export_tables;
pub use run::{run_scenario, RunOptions, RunRecord};
pub use scenario::{load_scenario, LoadedScenario, Scenario};
