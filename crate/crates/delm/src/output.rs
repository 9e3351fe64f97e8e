//! Deterministic JSON / CSV / TSV rendering.

use std::fmt;
use std::str::FromStr;

use delm_core::metrics::{BenchRow, CaseTally, CoverageSummary};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Tsv,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unsupported output format `{0}` (expected json, csv or tsv)")]
pub struct UnsupportedFormat(pub String);

impl FromStr for Format {
    type Err = UnsupportedFormat;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "tsv" => Ok(Format::Tsv),
            _ => Err(UnsupportedFormat(s.into())),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Tsv => "tsv",
        })
    }
}

impl Format {
    /// Guesses the format from a file extension, defaulting to JSON.
    pub fn for_path(path: &std::path::Path) -> Format {
        path.extension()
            .and_then(|e| e.to_str())
            .and_then(|e| e.parse().ok())
            .unwrap_or(Format::Json)
    }
}

/// Rows with a fixed column order.
pub trait Tabular {
    const HEADERS: &'static [&'static str];
    fn record(&self) -> Vec<String>;
}

fn pct(x: f64) -> String {
    format!("{x:.2}")
}

impl Tabular for BenchRow {
    const HEADERS: &'static [&'static str] = &[
        "fixture",
        "policy",
        "seed",
        "activity_cov_pct",
        "method_cov_pct",
        "unique_states",
        "crashes_tp",
        "crashes_fp",
        "interventions",
    ];

    fn record(&self) -> Vec<String> {
        vec![
            self.fixture.clone(),
            self.policy.clone(),
            self.seed.to_string(),
            pct(self.activity_cov_pct),
            pct(self.method_cov_pct),
            self.unique_states.to_string(),
            self.crashes_tp.to_string(),
            self.crashes_fp.to_string(),
            self.interventions.to_string(),
        ]
    }
}

impl Tabular for CoverageSummary {
    const HEADERS: &'static [&'static str] = &[
        "activity_coverage",
        "method_coverage",
        "unique_state_count",
        "crash_tp",
        "crash_fp",
        "visited_activities",
        "declared_activities",
        "covered_methods",
        "declared_methods",
    ];

    fn record(&self) -> Vec<String> {
        vec![
            pct(self.activity_coverage),
            pct(self.method_coverage),
            self.unique_state_count.to_string(),
            self.crash_tp.to_string(),
            self.crash_fp.to_string(),
            self.visited_activities.to_string(),
            self.declared_activities.to_string(),
            self.covered_methods.to_string(),
            self.declared_methods.to_string(),
        ]
    }
}

impl Tabular for CaseTally {
    const HEADERS: &'static [&'static str] = &["category", "passed", "total"];

    fn record(&self) -> Vec<String> {
        vec![
            self.category.label().into(),
            self.passed.to_string(),
            self.total.to_string(),
        ]
    }
}

/// Pretty JSON with a trailing newline.
pub fn emit_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("in-memory values serialize");
    s.push('\n');
    s
}

fn delimited<T: Tabular>(rows: &[T], delimiter: u8) -> String {
    let mut w = csv::WriterBuilder::new()
        .delimiter(delimiter)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(T::HEADERS).expect("writing to memory");
    for r in rows {
        w.write_record(r.record()).expect("writing to memory");
    }
    let bytes = w.into_inner().expect("flushing to memory");
    String::from_utf8(bytes).expect("records are UTF-8")
}

/// Renders a table. CSV/TSV always start with the header row.
pub fn emit_table<T: Tabular + Serialize>(rows: &[T], format: Format) -> String {
    match format {
        Format::Json => emit_json(rows),
        Format::Csv => delimited(rows, b','),
        Format::Tsv => delimited(rows, b'\t'),
    }
}

/// Renders a single record as a one-row table.
pub fn emit_one<T: Tabular + Serialize>(row: &T, format: Format) -> String {
    match format {
        Format::Json => emit_json(row),
        _ => emit_table(std::slice::from_ref(row), format),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(fixture: &str, policy: &str) -> BenchRow {
        BenchRow {
            fixture: fixture.into(),
            policy: policy.into(),
            seed: 1,
            activity_cov_pct: 100.0 / 3.0,
            method_cov_pct: 50.0,
            unique_states: 4,
            crashes_tp: 1,
            crashes_fp: 0,
            interventions: 2,
        }
    }

    #[test]
    fn empty_csv_is_header_only() {
        let out = emit_table::<BenchRow>(&[], Format::Csv);
        assert_eq!(
            out,
            "fixture,policy,seed,activity_cov_pct,method_cov_pct,unique_states,crashes_tp,crashes_fp,interventions\n"
        );
    }

    #[test]
    fn rows_use_lf_and_fixed_precision() {
        let rows = [
            row("a", "random"),
            row("a", "guided"),
            row("b", "random"),
            row("b", "guided"),
        ];
        let out = emit_table(&rows, Format::Csv);
        assert_eq!(out.lines().count(), 5);
        assert!(!out.contains('\r'));
        assert!(out.contains("a,random,1,33.33,50.00,4,1,0,2\n"));
        assert_eq!(out, emit_table(&rows, Format::Csv));
        let tsv = emit_table(&rows, Format::Tsv);
        assert!(tsv.starts_with("fixture\tpolicy\t"));
    }

    #[test]
    fn format_parsing() {
        assert_eq!("CSV".parse::<Format>(), Ok(Format::Csv));
        assert_eq!(
            "xml".parse::<Format>(),
            Err(UnsupportedFormat("xml".into()))
        );
        assert_eq!(Format::for_path("t.tsv".as_ref()), Format::Tsv);
        assert_eq!(Format::for_path("t".as_ref()), Format::Json);
    }
}
