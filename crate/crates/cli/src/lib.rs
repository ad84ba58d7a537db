//! Plan building and execution behind the `nelson` binary.
//!
//! [`build_plan`] turns an argument list into a fully resolved [`RunPlan`]
//! (every default filled in, seed explicit). [`execute_plan`] runs it and
//! writes plain files into the plan's output directory, always including a
//! `manifest.json` that echoes the plan.

mod error;
mod plan;
mod run;

pub use error::{CliError, ExitCode};
pub use plan::{
    build_plan, EvalPlan, Family, GenPlan, OraclePlan, OracleWhat, RunPlan, SamplePlan, TrainPlan,
    DEFAULT_GRAD_M, DEFAULT_KSAT_K,
};
pub use run::{execute_plan, Outcome, MANIFEST_FILE};
