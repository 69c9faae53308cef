use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pdalm::corpus;
use pdalm::model::validate;
use pdalm::{Mode, SolverConfig};
use pdalm_bench::report::JsonRun;
use pdalm_bench::run::{resolve_problems, solve_entry};
use pdalm_bench::{
    parse_config, run_benchmark, write_csv, write_json, BenchError, ConfigOverrides, OutputFormat, ProblemSelection,
    Result, RunSpec,
};

#[derive(Parser)]
#[command(name = "pdalm", version, about = "Primal-dual augmented Lagrangian solver and benchmark runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one corpus problem and print a summary.
    Solve {
        problem: String,
        #[arg(long, value_parser = parse_mode)]
        mode: Option<Mode>,
        /// Settings file (`key = value` lines).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write the run with its full iteration trace as JSON.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run problems under one or more modes and emit a results table.
    Bench {
        /// `all` or a comma-separated list of problem names.
        #[arg(long, default_value = "all")]
        problems: String,
        #[arg(long, value_delimiter = ',', default_value = "pdalm,alm", value_parser = parse_mode)]
        modes: Vec<Mode>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output file; the table goes to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "csv", value_parser = parse_format)]
        format: OutputFormat,
    },
    /// List the built-in problems.
    ListProblems,
    /// Check a problem's derivatives against finite differences.
    Validate { problem: String },
}

fn parse_mode(s: &str) -> std::result::Result<Mode, String> {
    s.parse().map_err(|e: pdalm::Error| e.to_string())
}

fn parse_format(s: &str) -> std::result::Result<OutputFormat, String> {
    s.parse().map_err(|e: BenchError| e.to_string())
}

fn load_config(path: Option<&Path>) -> Result<ConfigOverrides> {
    let Some(path) = path else {
        return Ok(ConfigOverrides::default());
    };
    let text = fs::read_to_string(path).map_err(|source| BenchError::Usage(format!("{}: {source}", path.display())))?;
    parse_config(&text).map_err(|e| match e {
        BenchError::Parse { line, column, message } => BenchError::Parse {
            line,
            column,
            message: format!("{}: {message}", path.display()),
        },
        BenchError::Domain { line, message } => BenchError::Domain {
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|source| BenchError::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn cmd_solve(problem: &str, mode: Option<Mode>, config: Option<&Path>, trace: Option<&Path>) -> Result<()> {
    let entries = resolve_problems(&ProblemSelection::Names(vec![problem.to_string()]))?;
    let overrides = load_config(config)?;
    let mut cfg = overrides.apply(&SolverConfig::default())?;
    if let Some(m) = mode {
        cfg.mode = m;
    }
    let mut trace_out = trace.map(create).transpose()?;
    let run = solve_entry(&entries[0], &cfg)?;
    let r = &run.report;
    println!("problem          {}", run.problem);
    println!("mode             {}", run.mode);
    println!("status           {}", r.status);
    println!("outer iterations {}", r.outer_iterations);
    println!("newton accepted  {}", r.newton_steps_accepted);
    println!("inner iterations {}", r.inner_iterations_total);
    println!("stationarity     {:.3e}", r.stationarity);
    println!("feasibility      {:.3e}", r.feasibility);
    println!("objective        {:.12e}", r.f_final);
    println!("x                {:?}", r.final_iterate.x);
    println!("wall time        {:.3e} s", r.wall_time_s);
    if let (Some(w), Some(path)) = (trace_out.as_mut(), trace) {
        serde_json::to_writer_pretty(&mut *w, &JsonRun::new(&run))?;
        w.flush().map_err(|source| BenchError::Io {
            path: path.to_path_buf(),
            source,
        })?;
    }
    Ok(())
}

fn cmd_bench(problems: &str, modes: Vec<Mode>, config: Option<&Path>, out: Option<PathBuf>, format: OutputFormat) -> Result<()> {
    let spec = RunSpec {
        problems: problems.parse()?,
        modes,
        config_overrides: load_config(config)?,
        output_path: out,
        output_format: format,
    };
    let report = run_benchmark(&spec)?;
    if spec.output_path.is_none() {
        let stdout = io::stdout();
        let mut lock = stdout.lock();
        match format {
            OutputFormat::Csv => write_csv(&report.rows(), &mut lock)?,
            OutputFormat::Json => {
                write_json(&report.runs, &mut lock)?;
                writeln!(lock).ok();
            }
        }
    }
    let prof = &report.profile;
    let alphas: Vec<String> = prof.alphas.iter().map(|a| format!("{a:>6}")).collect();
    eprintln!("performance profile (fraction solved within alpha x best time)");
    eprintln!("{:<8}{}", "alpha", alphas.join(""));
    for c in &prof.curves {
        let vals: Vec<String> = c.fractions.iter().map(|f| format!("{f:>6.3}")).collect();
        eprintln!("{:<8}{}", c.mode.as_str(), vals.join(""));
    }
    Ok(())
}

fn cmd_list() {
    println!("{:<22}{:>5}{:>4}  tags", "name", "n", "p");
    for e in corpus::corpus() {
        let tags: Vec<&str> = e.tags.iter().map(|t| t.as_str()).collect();
        println!("{:<22}{:>5}{:>4}  {}", e.name, e.problem.n(), e.problem.p(), tags.join(","));
    }
}

fn cmd_validate(problem: &str) -> Result<bool> {
    let entries = resolve_problems(&ProblemSelection::Names(vec![problem.to_string()]))?;
    let report = validate(&entries[0].problem);
    if report.is_clean() {
        println!("{problem}: ok");
    } else {
        for issue in &report.issues {
            println!("{problem}: {issue}");
        }
    }
    Ok(report.is_clean())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Solve {
            problem,
            mode,
            config,
            trace,
        } => cmd_solve(&problem, mode, config.as_deref(), trace.as_deref()),
        Command::Bench {
            problems,
            modes,
            config,
            out,
            format,
        } => cmd_bench(&problems, modes, config.as_deref(), out, format),
        Command::ListProblems => {
            cmd_list();
            Ok(())
        }
        Command::Validate { problem } => match cmd_validate(&problem) {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(2),
            Err(e) => Err(e),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
