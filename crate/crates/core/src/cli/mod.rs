//! Scenario files, claim suites and the reports the command line prints.

mod report;
mod scenario;
mod suite;

pub use report::{emit_report, ClaimResult, Format, Report, Status};
pub use scenario::{
    load_scenario, parse_scenario, FunctionSpec, RegimeSpec, Scenario, ScenarioEcho, ScenarioFile,
    ScenarioOptions, Word,
};
pub use suite::{coherence_agreement, levels, run_suite, RunOptions, Suite};
