//! Scenario runner and benchmark harness for the `modeplan` planner.
//!
//! `run` plans one scenario with one seed and writes `plan.json`,
//! `run.json` and `traj.csv`; `bench` aggregates seeded runs into one
//! timing row per scenario.

pub mod bench;
pub mod record;
pub mod run;

use thiserror::Error;

pub use bench::{bench, format_table, thread_count, BenchRow};
pub use record::{RefineSummary, RunRecord, SolutionSummary, Stats};
pub use run::{read_plan, replay_error, run_scenario, write_artifacts, write_trajectory, PlanFile, RunOptions, RunOutput};

/// Exit status for a run that found no solution within its budget.
pub const EXIT_NO_SOLUTION: i32 = 3;
/// Exit status for unreadable or invalid input.
pub const EXIT_BAD_INPUT: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Scenario(#[from] modeplan::ScenarioError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}
