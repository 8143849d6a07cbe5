//! Experiment runner for the nonlocal operator laboratory.
//!
//! Each suite maps a [`SweepConfig`] to a [`SweepReport`] of CSV rows
//! `experiment,sigma,beta,R,quantity,value,bound,pass`. Rows are computed
//! by a bounded worker pool and assembled in a fixed order, so a
//! `(config, seed)` pair always gives the same bytes.

pub mod checks;
pub mod config;
pub mod error;
pub mod lemma;
pub mod measure;
pub mod pool;
pub mod report;
pub mod sweeps;

pub use checks::{run_barrier_verify, run_op_eval, run_solve};
pub use config::SweepConfig;
pub use error::{HarnessError, Result};
pub use lemma::{run_lemma_suite, run_regvar_check};
pub use report::{emit, Row, SummaryEntry, SweepReport, Value};
pub use sweeps::{run_harnack_sweep, run_holder_sweep};
