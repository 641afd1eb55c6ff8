//! `results.csv` and `summary.json`.

use std::io::Write;
use std::path::Path;

use crate::runner::{ResultRecord, RunReport};
use crate::CliError;

pub const CSV_HEADER: [&str; 8] = ["scenario", "id", "n", "metric", "value", "aux", "verdict", "seconds"];

/// Shortest round-trip representation, so equal values print identically.
pub fn format_value(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:?}")
    }
}

pub fn write_csv<W: Write>(records: &[ResultRecord], w: W) -> Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_HEADER)?;
    for r in records {
        out.write_record([
            r.scenario.as_str(),
            r.id.as_str(),
            &r.n.to_string(),
            r.metric.as_str(),
            &format_value(r.value),
            r.aux.as_str(),
            r.verdict.as_str(),
            &format!("{:.6}", r.seconds),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn csv_string(records: &[ResultRecord]) -> String {
    let mut buf = Vec::new();
    write_csv(records, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv output is UTF-8")
}

pub fn write_all(report: &RunReport, dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let csv_path = dir.join("results.csv");
    std::fs::write(&csv_path, csv_string(&report.records)).map_err(|e| CliError::io(&csv_path, e))?;
    let json_path = dir.join("summary.json");
    let json = serde_json::to_string_pretty(&report.summary).expect("summary serializes");
    std::fs::write(&json_path, json + "\n").map_err(|e| CliError::io(&json_path, e))?;
    Ok(())
}
