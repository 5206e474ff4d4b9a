//! Datasets, the error decomposition, rate studies and the FLM experiment,
//! all emitting reports with CSV tables.

mod data;
mod flm;
mod metadata;
mod project;
mod rates;
pub mod report;

pub use data::{
    error_decomposition, evaluation_set, generate_dataset, generate_dataset_with, heldout_count, CenterMode,
    Decomposition, DecompositionConfig, GeneratedData, ProjectedTarget, SamplingConfig,
};
pub use flm::{
    decomposition_table, flm_experiment, loss_table, nonincreasing_within, width_study, FlmConfig, WidthStudy,
    WidthStudyConfig,
};
pub use metadata::{theorem_metadata, Theorem, TheoremMetadata, TheoremParams};
pub use project::{projection_demo, ProjectionRow};
pub use rates::{eigen_report, rate_study_eigen, rate_study_power, PowerRateStudy, PowerRow};
pub use report::{fmt_f64, line_plot, ExperimentReport, FittedSlope, Provenance, Table};
