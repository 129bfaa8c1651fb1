//! Output tables with an embedded run manifest.
//!
//! CSV files start with `# manifest: {...}` and optional `# summary: {...}`
//! comment lines, then a header and one observation per row. JSON files are
//! a single object `{"manifest", "summary", "columns", "rows"}`.

use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{ExperimentConfig, Format};
use crate::CliError;

/// Everything needed to re-run a command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: ExperimentConfig,
    pub generator: String,
    /// Named sub-streams of the base seed.
    pub seeds: Vec<(String, u64, u32)>,
    pub threads: usize,
    pub duration_seconds: f64,
}

impl RunManifest {
    pub fn new(command: &str, config: &ExperimentConfig) -> Self {
        Self {
            tool: "mbent".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config: config.clone(),
            generator: mbent::random::GENERATOR.into(),
            seeds: Vec::new(),
            threads: rayon::current_num_threads(),
            duration_seconds: 0.0,
        }
    }
}

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Empty,
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(if v { "true" } else { "false" }.into())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

impl Cell {
    fn to_csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            // serde_json writes the shortest round-trip representation.
            Cell::Float(v) if v.is_finite() => Value::from(*v),
            Cell::Float(v) => Value::from(v.to_string()),
            Cell::Text(s) => Value::from(s.clone()),
            Cell::Empty => Value::Null,
        }
    }
}

/// Rows plus summary for one command.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Vec<Value>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
            summary: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write<W: Write>(
        &self,
        manifest: &RunManifest,
        format: Format,
        out: W,
    ) -> Result<(), CliError> {
        match format {
            Format::Csv => self.write_csv(manifest, out),
            Format::Json => self.write_json(manifest, out),
        }
    }

    fn write_csv<W: Write>(&self, manifest: &RunManifest, mut out: W) -> Result<(), CliError> {
        writeln!(
            out,
            "# manifest: {}",
            serde_json::to_string(manifest).expect("manifest serializes")
        )?;
        for s in &self.summary {
            writeln!(out, "# summary: {s}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns).map_err(csv_error)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_csv))
                .map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }

    fn write_json<W: Write>(&self, manifest: &RunManifest, mut out: W) -> Result<(), CliError> {
        let rows: Vec<Vec<Value>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(Cell::to_json).collect())
            .collect();
        let doc = serde_json::json!({
            "manifest": manifest,
            "summary": self.summary,
            "columns": self.columns,
            "rows": rows,
        });
        serde_json::to_writer_pretty(&mut out, &doc).map_err(|e| CliError::Io(e.to_string()))?;
        writeln!(out)?;
        Ok(())
    }
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}

/// Parses the manifest line of a CSV output.
pub fn read_csv_manifest(text: &str) -> Option<RunManifest> {
    let line = text.lines().next()?.strip_prefix("# manifest: ")?;
    serde_json::from_str(line).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, std::f64::consts::PI, 1e-300, -2.5e17, 0.0] {
            assert_eq!(format_float(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![1usize.into(), 0.5.into()]);
        t.push(vec!["x".into(), Cell::Empty]);
        t.summary.push(serde_json::json!({"mean": 0.5}));
        let manifest = RunManifest::new("test", &ExperimentConfig::default());
        let mut buf = Vec::new();
        t.write(&manifest, Format::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# manifest: "));
        assert_eq!(lines[1], r#"# summary: {"mean":0.5}"#);
        assert_eq!(lines[2], "a,b");
        assert_eq!(lines[3], "1,5.0000000000000000e-1");
        assert_eq!(lines[4], "x,");
        assert_eq!(read_csv_manifest(&text).unwrap(), manifest);
    }

    #[test]
    fn json_layout() {
        let mut t = Table::new(&["a"]);
        t.push(vec![0.1.into()]);
        let manifest = RunManifest::new("test", &ExperimentConfig::default());
        let mut buf = Vec::new();
        t.write(&manifest, Format::Json, &mut buf).unwrap();
        let v: Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["rows"][0][0].as_f64().unwrap(), 0.1);
        assert_eq!(v["manifest"]["command"], "test");
    }
}
