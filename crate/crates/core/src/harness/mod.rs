//! Config-driven experiment runs and their reports.

pub mod config;
pub mod invariants;
pub mod report;
pub mod run;

pub use config::{
    emit_config, parse_config, ConfigError, ConfigViolation, EstimatorSpec, ExperimentConfig, FourierCoefficient,
    HeatSpec, ModelSpec, OutputFormat, TailSpec, Tolerances, MAX_HORIZON, MODEL_KINDS, SCHEMA_VERSION,
};
pub use invariants::{rng_stream, run_invariant_suite, InvariantResult, InvariantSummary};
pub use report::{
    emit_csv, emit_json, emit_report, format_sig, parse_report_json, round_sig, MeasurabilitySummary, ReportRow,
    RunReport, CSV_HEADER,
};
pub use run::{model_label, read_sequence_file, run_experiment};
