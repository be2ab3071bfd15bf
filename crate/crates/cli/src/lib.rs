//! Batch front end for the `specshift` library: experiment specifications,
//! report serialization and the experiment runners behind the binary.

pub mod error;
pub mod matrix_io;
pub mod report;
pub mod run;
pub mod spec;

pub use error::CliError;
pub use report::{Check, Relation, Report, Value};
pub use run::{run, run_suite, Artifact, Outcome, SuiteReport};
pub use spec::{Experiment, InstanceSpec, Params, PhiSpec};
