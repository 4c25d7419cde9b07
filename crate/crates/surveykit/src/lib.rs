//! File formats and the `surveykit` command line for `surveykit-core`.
//!
//! - [`specfile`]: variable spec files
//! - [`table`]: microdata CSV load and save
//! - [`scenario`]: TOML simulation scenarios
//! - [`model`]: fitted detector persistence
//! - [`report`]: JSON and CSV report writers
//! - [`cli`]: argument parsing and the subcommands

pub mod cli;
mod error;
pub mod model;
pub mod report;
pub mod scenario;
pub mod specfile;
pub mod table;

pub use error::{AppError, AppResult};

/// Version tag written into every JSON report and model file.
pub const SCHEMA_VERSION: u32 = 1;
