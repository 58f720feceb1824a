//! Experiment runner, exact leakage, hash-bound checks, the golden capacity
//! table and the self test.

use thiserror::Error;

use crate::capacity::CapacityError;
use crate::channel::ChannelError;

pub mod config;
pub mod leakage;
pub mod lemmas;
pub mod run;
pub mod selftest;
pub mod stats;
pub mod table;

pub use config::{AdversaryId, ExperimentConfig, SchemeId, SCHEMA_VERSION};
pub use leakage::{LeakageReport, SetLeakage, ViewScope};
pub use run::{run_trials, THREADS_ENV};
pub use selftest::{selftest, SelftestReport};
pub use stats::{wilson, TrialStats};
pub use table::{default_golden_path, verify_capacity_table, TableReport};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    /// The referee caught the adversary outside its sets. This is a bug in
    /// a strategy, never an attack outcome.
    #[error("referee violation in trial {trial}: {error}\ntranscript: {transcript}")]
    Referee {
        trial: u64,
        error: ChannelError,
        transcript: String,
    },
    #[error("scheme failure: {0}")]
    Scheme(String),
    #[error("leakage: {0}")]
    Leakage(String),
    #[error(transparent)]
    Capacity(#[from] CapacityError),
    #[error("io: {0}")]
    Io(String),
}
