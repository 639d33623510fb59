//! End-to-end runs for the `semadev` command: single documents, corpus
//! batches with ensembles, shuffle null tests and synthetic signals.

pub mod batch;
pub mod config;
pub mod pipeline;
pub mod report;
pub mod signal_file;

pub use batch::{run_batch, write_batch, BatchOutcome};
pub use config::{AnalysisConfig, InputKind, OutputFormat};
pub use pipeline::{analyze, analyze_document, load_document, PipelineError, Stage};
pub use report::{AnalysisReport, ShuffleSection, SCHEMA};
pub use signal_file::SignalFile;
