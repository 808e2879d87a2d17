//! Tabular reports with provenance metadata, emitted as CSV or JSON.
//!
//! CSV layout: one `# key=value` line per metadata entry, a header row, then
//! data rows with every number in `{:.16e}` notation. Parsing a report and
//! writing it again reproduces the input byte for byte.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("malformed report: {0}")]
    Malformed(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveReport {
    pub metadata: BTreeMap<String, String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CurveReport {
    pub fn new(columns: Vec<String>) -> Self {
        CurveReport {
            metadata: BTreeMap::new(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }

    pub fn push_row(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k}={v}");
        }
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        writer.write_record(&self.columns).expect("writing to memory");
        for row in &self.rows {
            writer
                .write_record(row.iter().map(|v| format_number(*v)))
                .expect("writing to memory");
        }
        let body = writer.into_inner().expect("flushing to memory");
        out.push_str(std::str::from_utf8(&body).expect("csv output is UTF-8"));
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, ReportError> {
        let mut metadata = BTreeMap::new();
        let mut body_start = 0;
        for line in text.split_inclusive('\n') {
            let Some(entry) = line.strip_prefix("# ") else { break };
            let entry = entry.trim_end_matches('\n');
            let (k, v) = entry
                .split_once('=')
                .ok_or_else(|| ReportError::Malformed(format!("metadata line without '=': {entry}")))?;
            metadata.insert(k.to_string(), v.to_string());
            body_start += line.len();
        }
        let mut reader = csv::ReaderBuilder::new().from_reader(&text.as_bytes()[body_start..]);
        let columns: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record?;
            let row = record
                .iter()
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| ReportError::Malformed(format!("row {}: not a number: {f}", i + 1)))
                })
                .collect::<Result<Vec<f64>, _>>()?;
            rows.push(row);
        }
        Ok(CurveReport {
            metadata,
            columns,
            rows,
        })
    }

    /// JSON form; non-finite numbers become `null`.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// Full-precision scientific notation; round-trips through `f64::from_str`.
pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}
