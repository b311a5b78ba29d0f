//! Command-line front end for `fdboot-core`: CSV ingestion, JSON reports,
//! parallel replicate execution, the simulation study and the sunspot workflow.

pub mod cli;
pub mod commands;
pub mod error;
pub mod experiment;
pub mod io;
pub mod parallel;
pub mod report;
pub mod sunspot;
pub mod variant;

pub use error::{CliError, Result};
