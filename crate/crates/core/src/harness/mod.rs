//! Config-driven experiment runs and the acceptance ledger.

pub mod acceptance;
pub mod config;
pub mod report;
pub mod run;

pub use config::{ExperimentConfig, GeometryConfig, Recipe, SampleConfig, Tolerances};
pub use report::{Check, LedgerEntry, RunReport, Status, SCHEMA_VERSION};
pub use run::{run, write_outputs};
