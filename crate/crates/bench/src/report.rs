//! Result tables: CSV with a fixed header and JSON with full traces.

use std::io::{Read, Write};
use std::str::FromStr;

use serde::Serialize;

use pdalm::driver::{IterationRecord, Iterate};
use pdalm::{Mode, SolverConfig, Status};

use crate::error::{BenchError, Result};
use crate::run::RunRecord;

pub const CSV_HEADER: [&str; 10] = [
    "problem",
    "mode",
    "status",
    "outer_iters",
    "newton_accepted",
    "inner_iters_total",
    "final_stationarity",
    "final_feasibility",
    "f_final",
    "wall_time_s",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub problem: String,
    pub mode: Mode,
    pub status: Status,
    pub outer_iters: usize,
    pub newton_accepted: usize,
    pub inner_iters_total: usize,
    pub final_stationarity: f64,
    pub final_feasibility: f64,
    pub f_final: f64,
    pub wall_time_s: f64,
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

pub fn write_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.problem.clone(),
            r.mode.to_string(),
            r.status.to_string(),
            r.outer_iters.to_string(),
            r.newton_accepted.to_string(),
            r.inner_iters_total.to_string(),
            format_float(r.final_stationarity),
            format_float(r.final_feasibility),
            format_float(r.f_final),
            format_float(r.wall_time_s),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

fn field<T: FromStr>(record: &csv::StringRecord, idx: usize, row: usize) -> Result<T> {
    let raw = record.get(idx).unwrap_or("");
    raw.parse()
        .map_err(|_| BenchError::Table(format!("row {row}: bad {} `{raw}`", CSV_HEADER[idx])))
}

/// Parses a table written by [`write_csv`].
pub fn read_csv<R: Read>(input: R) -> Result<Vec<BenchRow>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(BenchError::Table(format!("unexpected header {:?}", header.iter().collect::<Vec<_>>())));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        let mode = Mode::from_str(rec.get(1).unwrap_or(""))
            .map_err(|e| BenchError::Table(format!("row {row}: {e}")))?;
        let status = Status::from_str(rec.get(2).unwrap_or(""))
            .map_err(|e| BenchError::Table(format!("row {row}: {e}")))?;
        rows.push(BenchRow {
            problem: rec.get(0).unwrap_or("").to_string(),
            mode,
            status,
            outer_iters: field(&rec, 3, row)?,
            newton_accepted: field(&rec, 4, row)?,
            inner_iters_total: field(&rec, 5, row)?,
            final_stationarity: field(&rec, 6, row)?,
            final_feasibility: field(&rec, 7, row)?,
            f_final: field(&rec, 8, row)?,
            wall_time_s: field(&rec, 9, row)?,
        });
    }
    Ok(rows)
}

#[derive(Serialize)]
pub struct JsonRun<'a> {
    #[serde(flatten)]
    pub summary: BenchRow,
    pub h0_inf: f64,
    pub config: &'a SolverConfig,
    pub final_iterate: &'a Iterate,
    pub trace: &'a [IterationRecord],
}

impl<'a> JsonRun<'a> {
    pub fn new(run: &'a RunRecord) -> Self {
        Self {
            summary: run.row(),
            h0_inf: run.report.h0_inf,
            config: &run.report.config,
            final_iterate: &run.report.final_iterate,
            trace: &run.report.trace,
        }
    }
}

/// A JSON array with one object per run.
pub fn write_json<W: Write>(runs: &[RunRecord], out: W) -> Result<()> {
    let objects: Vec<JsonRun<'_>> = runs.iter().map(JsonRun::new).collect();
    serde_json::to_writer_pretty(out, &objects)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(problem: &str, stat: f64) -> BenchRow {
        BenchRow {
            problem: problem.into(),
            mode: Mode::Pdalm,
            status: Status::KktSatisfied,
            outer_iters: 3,
            newton_accepted: 2,
            inner_iters_total: 11,
            final_stationarity: stat,
            final_feasibility: 0.0,
            f_final: -1.0 / 3.0,
            wall_time_s: 1.25e-4,
        }
    }

    #[test]
    fn float_format_has_seventeen_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(-1.0 / 3.0), "-3.3333333333333331e-1");
        assert_eq!(format_float(0.0), "0.0000000000000000e0");
        assert_eq!(format_float(f64::INFINITY), "inf");
    }

    #[test]
    fn header_and_quoting() {
        let mut buf = Vec::new();
        write_csv(&[row("has,comma \"q\"", 1e-9)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.split("\r\n");
        assert_eq!(
            lines.next().unwrap(),
            "problem,mode,status,outer_iters,newton_accepted,inner_iters_total,final_stationarity,final_feasibility,f_final,wall_time_s"
        );
        assert!(lines.next().unwrap().starts_with("\"has,comma \"\"q\"\"\",pdalm,kkt_satisfied,3,2,11,"));
    }

    #[test]
    fn bad_header_is_rejected() {
        assert!(read_csv("a,b\n1,2\n".as_bytes()).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn csv_round_trips(name in "[a-z,\" ]{1,12}", stat in any::<f64>().prop_filter("finite", |v| v.is_finite()), f in -1e300..1e300f64) {
                let mut r = row(&name, stat);
                r.f_final = f;
                let mut buf = Vec::new();
                write_csv(std::slice::from_ref(&r), &mut buf).unwrap();
                let back = read_csv(buf.as_slice()).unwrap();
                prop_assert_eq!(back, vec![r]);
            }
        }
    }
}
