use std::io::Write;
use std::path::PathBuf;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::args::Format;
use crate::CliError;

pub const OUTPUT_DIR_VAR: &str = "SYMBELL_OUTPUT_DIR";

/// Tool version and the full parameter echo written at the top of every output.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub deterministic: bool,
    pub parameters: Value,
}

/// A command result: the JSON body and the CSV table carry the same data.
pub struct Report {
    pub body: Map<String, Value>,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    /// Extra `# ` lines in CSV output.
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(header: Vec<&'static str>) -> Self {
        Report {
            body: Map::new(),
            header,
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) {
        self.body
            .insert(key.into(), serde_json::to_value(value).expect("plain data serialises"));
    }

    pub fn render(&self, format: Format, prov: &Provenance) -> Result<Vec<u8>, CliError> {
        match format {
            Format::Json => {
                let mut doc = Map::new();
                doc.insert("provenance".into(), json!(prov));
                doc.extend(self.body.clone());
                let mut out =
                    serde_json::to_vec_pretty(&Value::Object(doc)).map_err(|e| CliError::Io(e.to_string()))?;
                out.push(b'\n');
                Ok(out)
            }
            Format::Csv => {
                let mut out = Vec::new();
                writeln!(out, "# tool={} version={}", prov.tool, prov.version).expect("vec write");
                writeln!(out, "# command={} deterministic={}", prov.command, prov.deterministic).expect("vec write");
                writeln!(out, "# parameters={}", prov.parameters).expect("vec write");
                for note in &self.notes {
                    writeln!(out, "# {note}").expect("vec write");
                }
                let mut w = csv::Writer::from_writer(out);
                let table = std::iter::once(self.header.iter().map(|s| s.to_string()).collect::<Vec<_>>())
                    .chain(self.rows.iter().cloned());
                for row in table {
                    w.write_record(&row).map_err(|e| CliError::Io(e.to_string()))?;
                }
                w.into_inner().map_err(|e| CliError::Io(e.to_string()))
            }
        }
    }
}

/// Resolves `--out` against the output-directory variable.
pub fn destination(out: &Option<PathBuf>) -> Option<PathBuf> {
    let path = out.as_ref()?;
    if path.is_relative() {
        if let Some(dir) = std::env::var_os(OUTPUT_DIR_VAR).filter(|d| !d.is_empty()) {
            return Some(PathBuf::from(dir).join(path));
        }
    }
    Some(path.clone())
}

pub fn emit(bytes: &[u8], out: &Option<PathBuf>) -> Result<(), CliError> {
    match destination(out) {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
            }
            std::fs::write(&path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
        }
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

/// Angle in units of π, six decimals.
pub fn pi_units(x: f64) -> f64 {
    (x / std::f64::consts::PI * 1e6).round() / 1e6
}

pub fn pi_text(x: f64) -> String {
    format!("{:.6}", x / std::f64::consts::PI)
}

/// Shortest round-trip representation, as in JSON.
pub fn num(x: f64) -> String {
    serde_json::to_string(&x).unwrap_or_else(|_| x.to_string())
}
