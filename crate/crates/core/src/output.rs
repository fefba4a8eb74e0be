//! CSV and JSON rendering of result tables.
//!
//! Columns are the swept axes in sweep order, then `eta_a, eta_w, P_gw, F_ic,
//! P_S, eta_tot, F`, then `error` (empty unless the point failed). Numbers are
//! written in scientific notation with 12 significant digits, so identical
//! tables render to identical bytes.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::scenario::ProtocolMetrics;
use crate::sweep::ResultTable;

pub const METRIC_COLUMNS: [&str; 7] = ["eta_a", "eta_w", "P_gw", "F_ic", "P_S", "eta_tot", "F"];
pub const ERROR_COLUMN: &str = "error";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!(
                "unknown output format `{other}` (expected csv or json)"
            )),
        }
    }
}

#[derive(Debug)]
pub enum EmitError {
    EmptyTable,
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl fmt::Display for EmitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EmitError::EmptyTable => write!(f, "refusing to write an empty result table"),
            EmitError::Io { path, source } => write!(f, "cannot write {path}: {source}"),
        }
    }
}

impl std::error::Error for EmitError {}

pub fn format_number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.11e}")
    } else {
        v.to_string()
    }
}

fn metric_values(m: &ProtocolMetrics) -> [f64; 7] {
    [
        m.channel.atmospheric,
        m.channel.widening_wandering,
        m.p_gw[0],
        m.f_ic,
        m.p_s,
        m.eta_tot,
        m.fidelity,
    ]
}

pub fn header(table: &ResultTable) -> Vec<String> {
    table
        .axes
        .iter()
        .cloned()
        .chain(METRIC_COLUMNS.iter().map(|s| s.to_string()))
        .chain(std::iter::once(ERROR_COLUMN.to_string()))
        .collect()
}

pub fn render(table: &ResultTable, format: OutputFormat) -> Result<String, EmitError> {
    if table.rows.is_empty() {
        return Err(EmitError::EmptyTable);
    }
    Ok(match format {
        OutputFormat::Csv => render_csv(table),
        OutputFormat::Json => render_json(table),
    })
}

fn render_csv(table: &ResultTable) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header(table)).expect("in-memory write");
    for row in &table.rows {
        let mut record: Vec<String> = row.axis_values.iter().map(|&v| format_number(v)).collect();
        match &row.outcome {
            Ok(m) => {
                record.extend(metric_values(m).iter().map(|&v| format_number(v)));
                record.push(String::new());
            }
            Err(e) => {
                record.extend(std::iter::repeat_n(String::new(), METRIC_COLUMNS.len()));
                record.push(e.clone());
            }
        }
        w.write_record(&record).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
}

fn render_json(table: &ResultTable) -> String {
    let keys = header(table);
    let mut out = String::from("[\n");
    for (i, row) in table.rows.iter().enumerate() {
        let mut fields: Vec<String> = row.axis_values.iter().map(|&v| format_number(v)).collect();
        match &row.outcome {
            Ok(m) => {
                fields.extend(metric_values(m).iter().map(|&v| json_number(v)));
                fields.push("null".into());
            }
            Err(e) => {
                fields.extend(std::iter::repeat_n(
                    "null".to_string(),
                    METRIC_COLUMNS.len(),
                ));
                fields.push(serde_json::to_string(e).expect("string serialises"));
            }
        }
        let body: Vec<String> = keys
            .iter()
            .zip(fields)
            .map(|(k, v)| format!("{}: {v}", serde_json::to_string(k).expect("key serialises")))
            .collect();
        out.push_str("  {");
        out.push_str(&body.join(", "));
        out.push('}');
        if i + 1 < table.rows.len() {
            out.push(',');
        }
        out.push('\n');
    }
    out.push_str("]\n");
    out
}

fn json_number(v: f64) -> String {
    if v.is_finite() {
        format_number(v)
    } else {
        "null".into()
    }
}

/// Renders and writes `table` to `path`.
pub fn emit_results(
    table: &ResultTable,
    format: OutputFormat,
    path: &Path,
) -> Result<(), EmitError> {
    let text = render(table, format)?;
    std::fs::write(path, text).map_err(|source| EmitError::Io {
        path: path.display().to_string(),
        source,
    })
}
