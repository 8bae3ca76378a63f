//! CSV tables and run manifests.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{ChainError, Result};

/// One CSV cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// Formats a float with 17 significant digits so the text round-trips exactly.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format_float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        self.rows.push(row);
    }

    pub fn render(&self) -> Result<String> {
        let width = self.header.len();
        if let Some(i) = self.rows.iter().position(|r| r.len() != width) {
            return Err(ChainError::invalid(format!("row {i} has {} cells, header has {width}", self.rows[i].len())));
        }
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        Ok(out)
    }
}

/// Writes `contents` to a sibling temporary file, then renames it over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| ChainError::invalid(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let result = (|| -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

pub fn emit_csv(table: &Table, path: &Path) -> Result<()> {
    write_atomic(path, table.render()?.as_bytes())
}

/// Outcome of one acceptance proxy evaluated during a run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProxyCheck {
    pub name: String,
    pub value: f64,
    pub threshold: String,
    pub pass: bool,
}

/// Record of one CLI run; enough to repeat it.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub argv: Vec<String>,
    pub version: String,
    /// Every resolved input, including defaults.
    pub inputs: serde_json::Value,
    pub params: serde_json::Value,
    pub grids: serde_json::Value,
    pub results: serde_json::Value,
    pub proxies: Vec<ProxyCheck>,
    pub outputs: Vec<String>,
    pub wall_time_s: f64,
}

/// Collects outputs of a run inside one directory.
pub struct OutputDir {
    pub root: PathBuf,
    pub written: Vec<String>,
}

impl OutputDir {
    pub fn new(root: PathBuf) -> Result<Self> {
        fs::create_dir_all(&root)?;
        Ok(Self { root, written: Vec::new() })
    }

    pub fn csv(&mut self, name: &str, table: &Table) -> Result<()> {
        let path = self.root.join(name);
        emit_csv(table, &path)?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn manifest(&self, manifest: &RunManifest) -> Result<PathBuf> {
        let path = self.root.join(format!("{}_manifest.json", manifest.subcommand));
        let text = serde_json::to_string_pretty(manifest)
            .map_err(|e| ChainError::NumericalFailure(format!("manifest serialisation: {e}")))?;
        write_atomic(&path, format!("{text}\n").as_bytes())?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
        let mut lines = text.lines();
        let header = lines.next().unwrap().split(',').map(String::from).collect();
        let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
        (header, rows)
    }

    #[test]
    fn empty_table_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.csv");
        emit_csv(&Table::new(&["a", "b"]), &path).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "a,b\n");
    }

    #[test]
    fn floats_round_trip_with_enough_digits() {
        let values = [0.1, 1.0 / 3.0, -2.051_145_816_6e-7, 6.02e23, 0.0, f64::MIN_POSITIVE];
        for v in values {
            let s = format_float(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits());
            let mantissa = s.split('e').next().unwrap().replace(['-', '.'], "");
            assert!(mantissa.len() >= 12, "{s}");
        }
    }

    #[test]
    fn large_table_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("big.csv");
        let mut t = Table::new(&["t", "v"]);
        let src: Vec<(f64, f64)> = (0..100_000).map(|i| (i as f64 * 0.1, (i as f64 * 0.37).sin())).collect();
        for (a, b) in &src {
            t.push(vec![(*a).into(), (*b).into()]);
        }
        emit_csv(&t, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.ends_with('\n'));
        let (header, rows) = parse(&text);
        assert_eq!(header, vec!["t", "v"]);
        assert_eq!(rows.len(), src.len());
        for (row, (a, b)) in rows.iter().zip(&src) {
            assert_eq!(row[0].parse::<f64>().unwrap().to_bits(), a.to_bits());
            assert_eq!(row[1].parse::<f64>().unwrap().to_bits(), b.to_bits());
        }
    }

    #[test]
    fn ragged_table_rejected() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![1.0.into()]);
        assert!(t.render().is_err());
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let err = emit_csv(&Table::new(&["a"]), Path::new("/nonexistent-dir/x/y.csv")).unwrap_err();
        assert!(matches!(err, ChainError::Io(_)));
    }
}
