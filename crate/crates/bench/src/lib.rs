//! Benchmark runner for the `pdalm` solver: runs corpus problems under
//! both solver modes, writes CSV or JSON tables and computes performance
//! profiles over wall time.

pub mod config;
pub mod error;
pub mod report;
pub mod run;

pub use config::{parse_config, ConfigOverrides, Setting};
pub use error::{BenchError, Result};
pub use report::{read_csv, write_csv, write_json, BenchRow, CSV_HEADER};
pub use run::{
    performance_profile, run_benchmark, BenchReport, OutputFormat, PerformanceProfile, ProblemSelection,
    RunRecord, RunSpec, PROFILE_ALPHAS,
};
