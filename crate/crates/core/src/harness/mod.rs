//! Command-line verification suites: configuration, seeded randomness, JSON
//! reports and CSV convergence tables.

pub mod config;
pub mod report;
pub mod suites;

pub use config::{default_index_set, Config, Tolerances};
pub use report::{Measurement, Relation, Report, RunOutput, Table};
pub use suites::{observed_order, run, seeded_rng, Suite};
