//! Tables and their CSV/JSON rendering. CSV output starts with one `#` line
//! holding the manifest, then a fixed header and the body; JSON wraps the same
//! rows as objects next to the manifest.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::spec::{Format, RunSpec};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct Manifest<'a> {
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub seed: u64,
    pub created_unix_seconds: u64,
    pub run_spec: &'a RunSpec,
}

impl<'a> Manifest<'a> {
    pub fn new(spec: &'a RunSpec) -> Self {
        let created = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Self {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION"),
            seed: spec.seed,
            created_unix_seconds: created,
            run_spec: spec,
        }
    }
}

/// Rows of JSON scalars under a fixed header, plus `key: value` summary lines.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
    pub summary: Vec<(String, Value)>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), ..Self::default() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn note(&mut self, key: impl Into<String>, value: impl Into<Value>) {
        self.summary.push((key.into(), value.into()));
    }

    fn cell(v: &Value) -> String {
        match v {
            Value::Null => String::new(),
            Value::String(s) => s.replace([',', '\n'], ";"),
            other => other.to_string(),
        }
    }

    pub fn write_csv<W: Write>(&self, manifest: &Manifest, mut w: W) -> io::Result<()> {
        writeln!(w, "# manifest: {}", serde_json::to_string(manifest)?)?;
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Self::cell).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn write_json<W: Write>(&self, manifest: &Manifest, mut w: W) -> io::Result<()> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Object(self.columns.iter().map(|c| c.to_string()).zip(r.iter().cloned()).collect()))
            .collect();
        let summary: Map<String, Value> = self.summary.iter().cloned().collect();
        let doc = json!({ "manifest": manifest, "columns": self.columns, "rows": rows, "summary": summary });
        serde_json::to_writer_pretty(&mut w, &doc)?;
        writeln!(w)
    }

    /// Writes the table to `spec.out` (summary to stdout) or, without an
    /// output path, the table to stdout and the summary to stderr.
    pub fn emit(&self, spec: &RunSpec) -> io::Result<()> {
        let manifest = Manifest::new(spec);
        match &spec.out {
            Some(path) => {
                self.write_to_path(&manifest, spec.format, path)?;
                self.print_summary(io::stdout().lock())
            }
            None => {
                let stdout = io::stdout().lock();
                match spec.format {
                    Format::Csv => self.write_csv(&manifest, stdout)?,
                    Format::Json => self.write_json(&manifest, stdout)?,
                }
                self.print_summary(io::stderr().lock())
            }
        }
    }

    fn write_to_path(&self, manifest: &Manifest, format: Format, path: &Path) -> io::Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        match format {
            Format::Csv => self.write_csv(manifest, &mut w)?,
            Format::Json => self.write_json(manifest, &mut w)?,
        }
        w.flush()
    }

    fn print_summary<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (k, v) in &self.summary {
            match v {
                Value::String(s) => writeln!(w, "{k}: {s}")?,
                other => writeln!(w, "{k}: {other}")?,
            }
        }
        Ok(())
    }
}

/// Sidecar manifest for binary outputs: `<path>.manifest.json`.
pub fn write_sidecar(spec: &RunSpec, path: &Path) -> io::Result<()> {
    let mut name = path.as_os_str().to_owned();
    name.push(".manifest.json");
    let mut w = BufWriter::new(File::create(name)?);
    serde_json::to_writer_pretty(&mut w, &Manifest::new(spec))?;
    writeln!(w)?;
    w.flush()
}
