//! Rectangular sweep results and their CSV / JSON serialization.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

/// Output file format.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!(
                "unknown output format '{other}' (expected csv or json)"
            ))),
        }
    }
}

/// One independent-variable grid plus named result columns and a metadata
/// block echoing the resolved configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    /// Name of the independent variable.
    pub independent: String,
    pub grid: Vec<f64>,
    /// Named columns, each the same length as the grid.
    pub columns: Vec<(String, Vec<f64>)>,
    /// Ordered key-value pairs; emitted verbatim.
    pub metadata: Vec<(String, String)>,
}

impl SweepTable {
    pub fn new(independent: impl Into<String>, grid: Vec<f64>) -> Self {
        Self {
            independent: independent.into(),
            grid,
            columns: Vec::new(),
            metadata: Vec::new(),
        }
    }

    pub fn push_column(&mut self, name: impl Into<String>, values: Vec<f64>) {
        assert_eq!(values.len(), self.grid.len(), "column length mismatch");
        self.columns.push((name.into(), values));
    }

    pub fn push_metadata(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.metadata.push((key.into(), value.into()));
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            writeln!(out, "# {k} = {v}").unwrap();
        }
        out.push_str(&csv_field(&self.independent));
        for (name, _) in &self.columns {
            out.push(',');
            out.push_str(&csv_field(name));
        }
        out.push('\n');
        for (i, g) in self.grid.iter().enumerate() {
            out.push_str(&format_value(*g));
            for (_, values) in &self.columns {
                out.push(',');
                out.push_str(&format_value(values[i]));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json_value(&self) -> Value {
        let mut meta = Map::new();
        for (k, v) in &self.metadata {
            meta.insert(k.clone(), Value::String(v.clone()));
        }
        let columns: Vec<Value> = self
            .columns
            .iter()
            .map(|(name, values)| {
                json!({
                    "name": name,
                    "values": values.iter().map(|&v| number_or_null(v)).collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({
            "meta": Value::Object(meta),
            "grid": {
                "name": self.independent,
                "values": self.grid.iter().map(|&v| number_or_null(v)).collect::<Vec<_>>(),
            },
            "columns": columns,
        })
    }

    pub fn from_json_value(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Config("table JSON must be an object".into()))?;
        let grid_obj = obj
            .get("grid")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::Config("missing 'grid' object".into()))?;
        let independent = grid_obj
            .get("name")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Config("grid needs a 'name'".into()))?
            .to_string();
        let grid = read_values(grid_obj.get("values"))?;
        let mut table = SweepTable::new(independent, grid);
        if let Some(meta) = obj.get("meta").and_then(Value::as_object) {
            for (k, v) in meta {
                let text = v
                    .as_str()
                    .ok_or_else(|| Error::Config(format!("metadata '{k}' must be a string")))?;
                table.push_metadata(k.clone(), text);
            }
        }
        for col in obj
            .get("columns")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Config("missing 'columns' array".into()))?
        {
            let col = col
                .as_object()
                .ok_or_else(|| Error::Config("column entries must be objects".into()))?;
            let name = col
                .get("name")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::Config("column needs a 'name'".into()))?;
            let values = read_values(col.get("values"))?;
            table.push_column(name, values);
        }
        Ok(table)
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.to_csv_string(),
            OutputFormat::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json_value())
                    .expect("table serialization cannot fail");
                s.push('\n');
                s
            }
        }
    }

    pub fn write_to(&self, w: &mut dyn Write, format: OutputFormat) -> Result<()> {
        w.write_all(self.render(format).as_bytes())?;
        Ok(())
    }

    pub fn write_file(&self, path: &Path, format: OutputFormat) -> Result<()> {
        let mut file = std::fs::File::create(path).map_err(|e| {
            Error::Io(std::io::Error::new(
                e.kind(),
                format!("cannot write {}: {e}", path.display()),
            ))
        })?;
        self.write_to(&mut file, format)
    }
}

fn read_values(v: Option<&Value>) -> Result<Vec<f64>> {
    v.and_then(Value::as_array)
        .ok_or_else(|| Error::Config("expected a 'values' array".into()))?
        .iter()
        .map(|entry| match entry {
            Value::Null => Ok(f64::NAN),
            Value::Number(n) => n
                .as_f64()
                .ok_or_else(|| Error::Config("non-finite number in values".into())),
            other => Err(Error::Config(format!("non-numeric value {other}"))),
        })
        .collect()
}

/// Numbers with 17 significant digits, round-trip exact; non-finite
/// values become null in JSON.
fn number_or_null(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

fn format_value(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
