//! Batch driver for the czframe diagnostics.
//!
//! A [`SuiteConfig`] selects grids, operators, diagnostics, radii, and
//! tolerances; [`run_suite`] produces a [`Report`] and [`emit`] writes it as
//! `report.json`, one CSV per profile, and `summary.txt`.

pub mod config;
pub mod error;
pub mod report;
pub mod suite;

pub use config::{Diagnostic, GridConfig, SuiteConfig, Tolerances};
pub use error::CliError;
pub use report::{emit, Check, Profile, Record, Report, Verdict};
pub use suite::{run_suite, run_suite_with, Workspace};

/// Exit codes of the `czframe` binary.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const FAIL: i32 = 1;
    pub const CONFIG: i32 = 2;
}
