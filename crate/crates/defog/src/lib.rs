//! Files, plans and experiments around `defog-core`.

pub mod codec;
pub mod config;
pub mod corpus;
pub mod degrade;
pub mod error;
pub mod harness;

pub use codec::{load_image, save_image};
pub use error::{DefogError, Result};
pub use harness::{
    emit_report, run_noreference_experiment, run_reference_experiment, ExperimentKind, ExperimentOutcome,
    ExperimentPlan, InputRef, Method, RunRecord,
};
