//! Experiment harness for blind radio-network broadcast simulations.
//!
//! Wraps the `blindcast-core` protocol engines with experiment
//! configuration, parallel trial orchestration, summary statistics,
//! scaling fits, the single-transmission bound validation suite, and
//! deterministic CSV / JSONL emission. The `blindcast` binary is the CLI
//! front end.

pub mod experiment;
pub mod fit;
pub mod lemma;
pub mod quantiles;

pub use experiment::{run_experiment, run_sweep, ExperimentOutput, ExperimentSpec, SummaryRow};
pub use fit::{fit_scaling, FitModel, FitPoint, FitReport};
pub use lemma::{validate_single_tx_lemma, LemmaReport};
