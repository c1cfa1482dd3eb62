//! Canonical metrics CSV: one row per follower per run plus an `all` row.

use std::fs;
use std::path::Path;

use freshlink_core::sim::{FollowerReport, MetricsReport};
use thiserror::Error;

pub const HEADER: [&str; 10] = [
    "run_id",
    "policy",
    "n",
    "rate_fps",
    "follower_id",
    "mean_aoi_s",
    "p95_aoi_s",
    "throughput_bps",
    "deliveries",
    "mean_tracking_error_m",
];

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("row {row}: {msg}")]
    Row { row: usize, msg: String },
    #[error("{0}")]
    Format(String),
}

/// One parsed CSV row. `follower` is `None` on the aggregate row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub run_id: u64,
    pub policy: String,
    pub n: u16,
    pub rate_fps: f64,
    pub follower: Option<u16>,
    pub mean_aoi_s: f64,
    pub p95_aoi_s: f64,
    pub throughput_bps: f64,
    pub deliveries: u64,
    pub tracking_error_m: Option<f64>,
}

/// Formats `x` with six significant digits, like C's `%g`.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        format!("{}e{exp}", trim_zeros(mantissa))
    } else {
        trim_zeros(&format!("{x:.*}", (5 - exp) as usize)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn row_fields(run_id: usize, report: &MetricsReport, f: &FollowerReport) -> [String; 10] {
    [
        run_id.to_string(),
        report.label().to_string(),
        report.n.to_string(),
        format_sig(report.rate_fps),
        f.id.map_or("all".to_string(), |id| id.to_string()),
        format_sig(f.mean_aoi_s),
        format_sig(f.p95_aoi_s),
        format_sig(f.throughput_bps),
        f.deliveries.to_string(),
        f.tracking_error_m.map(format_sig).unwrap_or_default(),
    ]
}

/// Renders `runs` in order; each run's id is its index.
pub fn render_metrics_csv(runs: &[MetricsReport]) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(HEADER).expect("in-memory write");
    for (run_id, report) in runs.iter().enumerate() {
        for f in report.followers.iter().chain(std::iter::once(&report.aggregate)) {
            w.write_record(row_fields(run_id, report, f)).expect("in-memory write");
        }
    }
    let bytes = w.into_inner().expect("in-memory flush");
    String::from_utf8(bytes).expect("ascii output")
}

pub fn write_metrics_csv(runs: &[MetricsReport], path: &Path) -> Result<(), CsvError> {
    fs::write(path, render_metrics_csv(runs)).map_err(|source| CsvError::Io { path: path.display().to_string(), source })
}

fn field<T: std::str::FromStr>(record: &csv::StringRecord, k: usize, row: usize) -> Result<T, CsvError> {
    let raw = record.get(k).unwrap_or("");
    raw.parse()
        .map_err(|_| CsvError::Row { row, msg: format!("column {} has bad value `{raw}`", HEADER[k]) })
}

fn finite(record: &csv::StringRecord, k: usize, row: usize) -> Result<f64, CsvError> {
    let v: f64 = field(record, k, row)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CsvError::Row { row, msg: format!("column {} is not finite", HEADER[k]) })
    }
}

/// Parses CSV text; rows are numbered from 1 at the header.
pub fn parse_metrics_csv(text: &str) -> Result<Vec<CsvRow>, CsvError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let row = k + 1;
        let record = record.map_err(|e| CsvError::Row { row, msg: e.to_string() })?;
        if record.len() != HEADER.len() {
            return Err(CsvError::Row { row, msg: format!("expected {} columns, found {}", HEADER.len(), record.len()) });
        }
        if row == 1 {
            if record.iter().ne(HEADER) {
                return Err(CsvError::Row { row, msg: "header does not match the metrics format".into() });
            }
            continue;
        }
        let follower = match record.get(4) {
            Some("all") => None,
            _ => Some(field(&record, 4, row)?),
        };
        let tracking_error_m = match record.get(9) {
            Some("") => None,
            _ => Some(finite(&record, 9, row)?),
        };
        rows.push(CsvRow {
            run_id: field(&record, 0, row)?,
            policy: record.get(1).unwrap_or("").to_string(),
            n: field(&record, 2, row)?,
            rate_fps: finite(&record, 3, row)?,
            follower,
            mean_aoi_s: finite(&record, 5, row)?,
            p95_aoi_s: finite(&record, 6, row)?,
            throughput_bps: finite(&record, 7, row)?,
            deliveries: field(&record, 8, row)?,
            tracking_error_m,
        });
    }
    if rows.is_empty() && text.trim().is_empty() {
        return Err(CsvError::Format("empty metrics file".into()));
    }
    Ok(rows)
}
