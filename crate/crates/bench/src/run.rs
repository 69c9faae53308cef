use std::fmt;
use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use pdalm::corpus::{self, CorpusEntry};
use pdalm::{solve, Mode, SolveReport, SolverConfig, Status};

use crate::config::ConfigOverrides;
use crate::error::{BenchError, Result};
use crate::report::{write_csv, write_json, BenchRow};

/// Ratios at which the performance profile is sampled.
pub const PROFILE_ALPHAS: [f64; 5] = [1.0, 2.0, 5.0, 10.0, 100.0];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProblemSelection {
    All,
    Names(Vec<String>),
}

impl FromStr for ProblemSelection {
    type Err = BenchError;

    /// `all` or a comma-separated list of names.
    fn from_str(s: &str) -> Result<Self> {
        if s.trim() == "all" {
            return Ok(ProblemSelection::All);
        }
        let names: Vec<String> = s
            .split(',')
            .map(str::trim)
            .filter(|n| !n.is_empty())
            .map(String::from)
            .collect();
        if names.is_empty() {
            return Err(BenchError::Usage("empty problem list".into()));
        }
        Ok(ProblemSelection::Names(names))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(BenchError::Usage(format!("format must be csv or json, got `{other}`"))),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

#[derive(Debug, Clone)]
pub struct RunSpec {
    pub problems: ProblemSelection,
    pub modes: Vec<Mode>,
    /// Applied on top of the default configuration; a `mode` entry here is
    /// ignored in favour of `modes`.
    pub config_overrides: ConfigOverrides,
    pub output_path: Option<PathBuf>,
    pub output_format: OutputFormat,
}

impl Default for RunSpec {
    fn default() -> Self {
        Self {
            problems: ProblemSelection::All,
            modes: vec![Mode::Pdalm, Mode::Alm],
            config_overrides: ConfigOverrides::default(),
            output_path: None,
            output_format: OutputFormat::Csv,
        }
    }
}

/// One solver run of a benchmark.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub problem: String,
    pub mode: Mode,
    pub report: SolveReport,
}

impl RunRecord {
    pub fn row(&self) -> BenchRow {
        let r = &self.report;
        BenchRow {
            problem: self.problem.clone(),
            mode: self.mode,
            status: r.status,
            outer_iters: r.outer_iterations,
            newton_accepted: r.newton_steps_accepted,
            inner_iters_total: r.inner_iterations_total,
            final_stationarity: r.stationarity,
            final_feasibility: r.feasibility,
            f_final: r.f_final,
            wall_time_s: r.wall_time_s,
        }
    }
}

/// Fraction of problems each mode solves within `alpha` times the fastest
/// successful wall time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceProfile {
    pub alphas: Vec<f64>,
    pub curves: Vec<ProfileCurve>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileCurve {
    pub mode: Mode,
    pub fractions: Vec<f64>,
    /// Fraction of problems the mode solved at all.
    pub solved: f64,
}

impl PerformanceProfile {
    pub fn curve(&self, mode: Mode) -> Option<&ProfileCurve> {
        self.curves.iter().find(|c| c.mode == mode)
    }
}

pub fn performance_profile(runs: &[RunRecord], modes: &[Mode], alphas: &[f64]) -> PerformanceProfile {
    let mut problems: Vec<&str> = runs.iter().map(|r| r.problem.as_str()).collect();
    problems.sort_unstable();
    problems.dedup();
    let count = problems.len().max(1) as f64;

    let solved_time = |problem: &str, mode: Mode| {
        runs.iter()
            .find(|r| r.problem == problem && r.mode == mode)
            .filter(|r| r.report.status == Status::KktSatisfied)
            .map(|r| r.report.wall_time_s)
    };
    let best: Vec<Option<f64>> = problems
        .iter()
        .map(|p| {
            modes
                .iter()
                .filter_map(|&m| solved_time(p, m))
                .min_by(f64::total_cmp)
        })
        .collect();

    let curves = modes
        .iter()
        .map(|&mode| {
            let ratios: Vec<Option<f64>> = problems
                .iter()
                .zip(&best)
                .map(|(p, b)| {
                    let t = solved_time(p, mode)?;
                    let b = b.expect("a solved run implies a best time");
                    Some(if b > 0.0 { t / b } else { 1.0 })
                })
                .collect();
            let fractions = alphas
                .iter()
                .map(|&a| ratios.iter().filter(|r| r.is_some_and(|r| r <= a)).count() as f64 / count)
                .collect();
            let solved = ratios.iter().filter(|r| r.is_some()).count() as f64 / count;
            ProfileCurve { mode, fractions, solved }
        })
        .collect();
    PerformanceProfile {
        alphas: alphas.to_vec(),
        curves,
    }
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    /// Sorted by problem name, then mode name.
    pub runs: Vec<RunRecord>,
    pub profile: PerformanceProfile,
}

impl BenchReport {
    pub fn rows(&self) -> Vec<BenchRow> {
        self.runs.iter().map(RunRecord::row).collect()
    }
}

pub fn resolve_problems(selection: &ProblemSelection) -> Result<Vec<CorpusEntry>> {
    match selection {
        ProblemSelection::All => Ok(corpus::corpus()),
        ProblemSelection::Names(names) => {
            let all = corpus::corpus();
            names
                .iter()
                .map(|n| {
                    all.iter()
                        .find(|e| e.name == n)
                        .cloned()
                        .ok_or_else(|| BenchError::UnknownProblem(n.clone()))
                })
                .collect()
        }
    }
}

pub fn solve_entry(entry: &CorpusEntry, config: &SolverConfig) -> Result<RunRecord> {
    let report = solve(&entry.problem, config)?;
    Ok(RunRecord {
        problem: entry.name.to_string(),
        mode: config.mode,
        report,
    })
}

/// Runs every (problem, mode) pair in parallel and writes the table when an
/// output path is given. Problem names and the output file are checked
/// before any solve starts.
pub fn run_benchmark(spec: &RunSpec) -> Result<BenchReport> {
    let entries = resolve_problems(&spec.problems)?;
    if spec.modes.is_empty() {
        return Err(BenchError::Usage("no modes selected".into()));
    }
    let mut modes = spec.modes.clone();
    modes.sort_by_key(|m| m.as_str());
    modes.dedup();
    let base = spec.config_overrides.apply(&SolverConfig::default())?;

    let out = spec
        .output_path
        .as_ref()
        .map(|path| {
            File::create(path)
                .map(BufWriter::new)
                .map_err(|source| BenchError::Io {
                    path: path.clone(),
                    source,
                })
        })
        .transpose()?;

    let jobs: Vec<(&CorpusEntry, Mode)> = entries
        .iter()
        .flat_map(|e| modes.iter().map(move |&m| (e, m)))
        .collect();
    let mut runs = jobs
        .par_iter()
        .map(|&(e, mode)| solve_entry(e, &base.clone().with_mode(mode)))
        .collect::<Result<Vec<_>>>()?;
    runs.sort_by(|a, b| (a.problem.as_str(), a.mode.as_str()).cmp(&(b.problem.as_str(), b.mode.as_str())));
    runs.dedup_by(|a, b| a.problem == b.problem && a.mode == b.mode);

    let profile = performance_profile(&runs, &modes, &PROFILE_ALPHAS);
    let report = BenchReport { runs, profile };

    if let (Some(mut w), Some(path)) = (out, spec.output_path.as_ref()) {
        let io_err = |source| BenchError::Io {
            path: path.clone(),
            source,
        };
        match spec.output_format {
            OutputFormat::Csv => write_csv(&report.rows(), &mut w)?,
            OutputFormat::Json => write_json(&report.runs, &mut w)?,
        }
        std::io::Write::flush(&mut w).map_err(io_err)?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(problem: &str, mode: Mode, status: Status, time: f64) -> RunRecord {
        let entry = corpus::find("eq_quadratic_2d").unwrap();
        let mut report = solve(&entry.problem, &SolverConfig::default().with_mode(mode)).unwrap();
        report.status = status;
        report.wall_time_s = time;
        RunRecord {
            problem: problem.into(),
            mode,
            report,
        }
    }

    #[test]
    fn profile_from_hand_made_times() {
        let runs = vec![
            record("a", Mode::Alm, Status::KktSatisfied, 2.0),
            record("a", Mode::Pdalm, Status::KktSatisfied, 1.0),
            record("b", Mode::Alm, Status::KktSatisfied, 1.0),
            record("b", Mode::Pdalm, Status::KktSatisfied, 9.0),
            record("c", Mode::Alm, Status::MaxOuter, 1.0),
            record("c", Mode::Pdalm, Status::KktSatisfied, 3.0),
            record("d", Mode::Alm, Status::MaxOuter, 1.0),
            record("d", Mode::Pdalm, Status::MaxOuter, 1.0),
        ];
        let prof = performance_profile(&runs, &[Mode::Alm, Mode::Pdalm], &PROFILE_ALPHAS);
        // alm ratios: a 2, b 1; pdalm ratios: a 1, b 9, c 1
        assert_eq!(prof.curve(Mode::Alm).unwrap().fractions, vec![0.25, 0.5, 0.5, 0.5, 0.5]);
        assert_eq!(prof.curve(Mode::Pdalm).unwrap().fractions, vec![0.5, 0.5, 0.5, 0.75, 0.75]);
        assert_eq!(prof.curve(Mode::Pdalm).unwrap().solved, 0.75);
    }

    #[test]
    fn selection_parsing() {
        assert_eq!("all".parse::<ProblemSelection>().unwrap(), ProblemSelection::All);
        assert_eq!(
            "hs6, hs7".parse::<ProblemSelection>().unwrap(),
            ProblemSelection::Names(vec!["hs6".into(), "hs7".into()])
        );
        assert!(",".parse::<ProblemSelection>().is_err());
        assert!("xml".parse::<OutputFormat>().is_err());
    }

    #[test]
    fn unknown_names_fail_before_running() {
        let err = resolve_problems(&ProblemSelection::Names(vec!["hs6".into(), "nope".into()])).unwrap_err();
        assert!(matches!(err, BenchError::UnknownProblem(ref n) if n == "nope"));
    }
}
