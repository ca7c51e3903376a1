//! Scenario-file front end for the `matterwave` simulator.

pub mod run;
pub mod scenario;

pub use run::{run_scenario, RunError, RunSummary};
pub use scenario::{load_scenario, load_scenario_with, Scenario, ScenarioError};

/// Exit status for a scenario that fails to load or validate.
pub const EXIT_VALIDATION: i32 = 1;
/// Exit status for a failure while running.
pub const EXIT_NUMERICAL: i32 = 2;
