//! Tabular outputs: CSV with a `# key: value` header and a JSON mirror.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

/// Shortest representation that parses back to the same value, with an
/// exponent for very small or large magnitudes.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Both,
}

#[derive(Debug, Clone, Serialize)]
pub struct Table {
    #[serde(skip)]
    pub name: String,
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct JsonTable<'a> {
    metadata: serde_json::Map<String, serde_json::Value>,
    columns: &'a [String],
    rows: &'a [Vec<f64>],
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            metadata: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        let v = value.to_string();
        debug_assert!(!v.contains('\n'));
        self.metadata.push((key.to_string(), v));
    }

    pub fn num(&mut self, key: &str, value: f64) {
        self.meta(key, fmt_f64(value));
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write(&self, dir: &Path, format: Format) -> anyhow::Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        if matches!(format, Format::Csv | Format::Both) {
            let path = dir.join(format!("{}.csv", self.name));
            self.write_csv(&path)?;
            written.push(path);
        }
        if matches!(format, Format::Json | Format::Both) {
            let path = dir.join(format!("{}.json", self.name));
            self.write_json(&path)?;
            written.push(path);
        }
        Ok(written)
    }

    fn write_csv(&self, path: &Path) -> anyhow::Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        for (k, v) in &self.metadata {
            writeln!(out, "# {k}: {v}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|&x| fmt_f64(x)))?;
        }
        w.flush()?;
        Ok(())
    }

    fn write_json(&self, path: &Path) -> anyhow::Result<()> {
        let metadata = self
            .metadata
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
            .collect();
        let doc = JsonTable { metadata, columns: &self.columns, rows: &self.rows };
        let mut out = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut out, &doc)?;
        writeln!(out)?;
        out.flush()?;
        Ok(())
    }
}
