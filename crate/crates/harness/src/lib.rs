//! Benchmark campaigns for `bo-core`: multi-seed runs of every
//! (problem, method) pair, log₁₀-distance summaries, paired t-test comparison
//! tables, evaluations-to-tolerance counts, and CSV/JSON/SVG reports.

mod baseline;
mod campaign;
mod config;
mod error;
mod method;
mod report;
mod stats;

pub use baseline::{nelder_mead_multistart, NM_REL_TOL};
pub use campaign::{bo_config, campaign_problem, execute_run, run_campaign, run_keys, trace_path, Archive, RunKey, RunMeta, RunRecord, TraceFile, CONFIG_FILE, RUNS_DIR};
pub use config::{CampaignConfig, DEFAULT_TOLERANCE_TARGET, OUTPUT_DIR_ENV};
pub use error::{HarnessError, Result};
pub use method::{Method, DEFAULT_NM_STARTS};
pub use report::{
    convergence_svg, csv_header, default_reference, emit_reports, render_comparison_table, trace_from_csv, trace_to_csv, validate_manifest, ReportFiles,
    MANIFEST_FILE, MANIFEST_SCHEMA,
};
pub use stats::{
    compare_methods, comparison_table, distance_at, distance_summary, distance_trace, evals_to_target, evals_to_tolerance, mean_sem, paired_t_test,
    ComparisonCell, ComparisonTable, SummaryPoint, Tally, ToleranceSummary, DEFAULT_ALPHA,
};
