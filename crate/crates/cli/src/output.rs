//! Digests, file reading and report emission shared by the subcommands.

use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

pub const TOOL: &str = "scanlens";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn read_input(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

/// Configuration files are config errors even when they cannot be read.
pub fn read_config(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

/// One CSV table: a name, its header and rows of already-formatted cells.
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: Vec<&'static str>) -> Self {
        Table { name: name.into(), header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn render(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Input(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

/// Writes tables as `<name>.csv` files under `out`, or to stdout separated
/// by `# name` lines.
pub fn emit_tables(tables: &[Table], out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(dir) => {
            for t in tables {
                write_file(dir, &format!("{}.csv", t.name), &t.render())?;
            }
        }
        None => {
            let mut text = String::new();
            for (i, t) in tables.iter().enumerate() {
                if i > 0 {
                    text.push('\n');
                }
                text.push_str(&format!("# {}\n", t.name));
                text.push_str(&t.render());
            }
            print!("{text}");
        }
    }
    Ok(())
}

pub fn emit_json(text: &str, file_name: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(dir) => write_file(dir, file_name, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Empirical CDF points `(x, fraction of samples <= x)`.
pub fn cdf(samples: &[f64]) -> Vec<(f64, f64)> {
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, x) in v.iter().enumerate() {
        let f = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == *x => last.1 = f,
            _ => out.push((*x, f)),
        }
    }
    out
}
