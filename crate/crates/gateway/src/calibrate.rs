//! The `calibrate` command: fits sensitivities from CSV, synthetic trials, or
//! the bundled table, writing JSON records.

use std::io::Write;
use std::path::PathBuf;

use serde::Serialize;

use pocketvine::calibration::{
    factor_report, group_samples, ingest_csv, reproduce_table, CalibrationError, FactorReport, SyntheticSpec,
};
use pocketvine::pocket_model::SensitivityTable;

#[derive(Debug, Clone)]
pub enum Source {
    ReproducePaper,
    Csv(PathBuf),
    Synthetic(String),
}

#[derive(Serialize)]
struct ErrorLine<'a> {
    error: &'a str,
    detail: String,
}

#[derive(Serialize)]
struct RowErrorLine<'a> {
    line: u64,
    error: &'a str,
    detail: &'a str,
}

#[derive(Serialize)]
struct Summary {
    reproduced: usize,
    passed: usize,
}

/// Writes `{"error", "detail"}` to `err`.
pub fn write_error<W: Write + ?Sized>(err: &mut W, code: &str, detail: impl ToString) -> std::io::Result<()> {
    let line = ErrorLine { error: code, detail: detail.to_string() };
    writeln!(err, "{}", serde_json::to_string(&line).map_err(std::io::Error::other)?)
}

fn build(source: &Source, out: &mut dyn Write, err: &mut dyn Write) -> Result<(FactorReport, bool), CalibrationError> {
    match source {
        Source::ReproducePaper => {
            let (report, rows) = reproduce_table(SensitivityTable::bundled())?;
            for r in &rows {
                writeln!(out, "{}", serde_json::to_string(r).map_err(std::io::Error::other)?)?;
            }
            let passed = rows.iter().filter(|r| r.pass).count();
            let summary = Summary { reproduced: rows.len(), passed };
            writeln!(out, "{}", serde_json::to_string(&summary).map_err(std::io::Error::other)?)?;
            Ok((report, passed == rows.len()))
        }
        Source::Csv(path) => {
            let file = std::fs::File::open(path)?;
            let ingested = ingest_csv(file)?;
            for e in &ingested.row_errors {
                let line = RowErrorLine { line: e.line, error: e.code, detail: &e.detail };
                writeln!(err, "{}", serde_json::to_string(&line).map_err(std::io::Error::other)?)?;
            }
            let report = factor_report(&group_samples(&ingested.samples));
            let ok = report.groups.iter().all(|g| g.fit.is_ok());
            Ok((report, ok && ingested.row_errors.is_empty()))
        }
        Source::Synthetic(spec) => {
            let spec: SyntheticSpec = spec.parse()?;
            let samples = spec.generate()?;
            let report = factor_report(&group_samples(&samples));
            let ok = report.groups.iter().all(|g| g.fit.is_ok());
            Ok((report, ok))
        }
    }
}

/// Runs one calibration and returns the process exit code: 0 on success, 1
/// when any fit or reproduced row failed, 2 on unusable input.
pub fn run(source: &Source, out: &mut dyn Write, plot: Option<&mut dyn Write>, err: &mut dyn Write) -> i32 {
    match build(source, out, err) {
        Ok((report, ok)) => {
            let written = report.write_records(&mut *out).and_then(|_| match plot {
                Some(p) => report.write_plot_data(p),
                None => Ok(()),
            });
            if let Err(e) = written {
                let _ = write_error(err, "IO", e);
                return 2;
            }
            if ok {
                0
            } else {
                1
            }
        }
        Err(e) => {
            let _ = write_error(err, e.code(), e);
            2
        }
    }
}
