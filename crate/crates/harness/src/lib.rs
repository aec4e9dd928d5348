//! Benchmark harness: trial execution, sweeps, statistics, and plots.
//!
//! The harness runs closed-loop episodes from [`ricochet_core`] under named
//! weight strategies, aggregates arrival-time/path-length statistics across
//! seeded trials, and emits CSV and SVG artifacts. Everything except wall
//! clock timings is deterministic in (world, spec, seed).

use std::path::PathBuf;

use thiserror::Error;

use ricochet_core::simulator::SimError;
use ricochet_core::simulator::WorldError;

pub mod output;
pub mod plot;
pub mod records;
pub mod stats;
pub mod sweep;

pub use output::{emit_outputs, read_timings, read_trials};
pub use records::{parse_trials_csv, render_trials_csv, TrialRecord};
pub use stats::{improvement_table, mean_std, summarize, timing_report, ImprovementTable, TimingReport};
pub use sweep::{
    builtin_strategies, run_trial, run_trials, run_trials_with_jobs, strategy_by_label,
    StrategySpec, SweepSpec, TrialOutput,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("I/O failure on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    World(#[from] WorldError),
    #[error("episode failed: {0}")]
    Sim(#[from] SimError),
    #[error("cannot parse sweep spec {path}: {msg}")]
    Spec { path: PathBuf, msg: String },
    #[error("unknown strategy `{0}` (builtins: harness, high_risk, low_risk)")]
    UnknownStrategy(String),
    #[error("invalid sweep spec: {0}")]
    InvalidSpec(&'static str),
    #[error("CSV parse error at line {line}: {msg}")]
    Csv { line: usize, msg: String },
    #[error("records are missing strategy `{0}`")]
    MissingStrategy(String),
}
