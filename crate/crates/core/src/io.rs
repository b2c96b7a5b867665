//! Output writers: CSV tables, JSON summaries and whitespace-separated plot
//! data, plus the failure record emitted on numerical errors.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_f64(v: f64) -> String {
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

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Missing,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format_f64(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Missing => String::new(),
        }
    }
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

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Int(v as i64)
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

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Num)
    }
}

/// A rectangular table with named columns.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::InvalidParameter(format!("row has {} cells, table has {} columns", row.len(), self.columns.len())));
        }
        self.rows.push(row);
        Ok(())
    }

    fn quote(s: &str) -> String {
        if s.contains([',', '"', '\n']) {
            format!("\"{}\"", s.replace('"', "\"\""))
        } else {
            s.to_string()
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.iter().map(|c| Self::quote(c)).collect::<Vec<_>>().join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.iter().map(|c| Self::quote(&c.render())).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }

    /// Plot data: a `#` header line, then whitespace-separated numeric columns.
    /// Text cells become `-`.
    pub fn to_plot_data(&self) -> String {
        let mut out = format!("# {}\n", self.columns.join(" "));
        for r in &self.rows {
            let cells: Vec<String> = r
                .iter()
                .map(|c| match c {
                    Cell::Text(_) | Cell::Missing => "-".into(),
                    other => other.render(),
                })
                .collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out
    }

    /// Aligned plain-text rendering for terminals.
    pub fn to_text(&self) -> String {
        let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(Cell::render).collect()).collect();
        let width: Vec<usize> = (0..self.columns.len())
            .map(|j| cells.iter().map(|r| r[j].len()).chain(std::iter::once(self.columns[j].len())).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        let line = |out: &mut String, items: &[String]| {
            let parts: Vec<String> = items.iter().zip(&width).map(|(s, w)| format!("{s:>w$}")).collect();
            let _ = writeln!(out, "{}", parts.join("  "));
        };
        line(&mut out, &self.columns);
        for r in &cells {
            line(&mut out, r);
        }
        out
    }
}

/// Parses a CSV produced by [`Table::to_csv`] back into header and raw cells.
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut lines = Vec::new();
    let mut field = String::new();
    let mut row = Vec::new();
    let mut quoted = false;
    let mut chars = text.chars().peekable();
    while let Some(ch) = chars.next() {
        match (ch, quoted) {
            ('"', true) if chars.peek() == Some(&'"') => {
                chars.next();
                field.push('"');
            }
            ('"', _) => quoted = !quoted,
            (',', false) => row.push(std::mem::take(&mut field)),
            ('\n', false) => {
                row.push(std::mem::take(&mut field));
                lines.push(std::mem::take(&mut row));
            }
            (c, _) => field.push(c),
        }
    }
    if quoted {
        return Err(Error::Parse("unterminated quoted field".into()));
    }
    if !field.is_empty() || !row.is_empty() {
        row.push(field);
        lines.push(row);
    }
    let mut it = lines.into_iter();
    let header = it.next().ok_or_else(|| Error::Parse("empty CSV".into()))?;
    let rows: Vec<Vec<String>> = it.collect();
    if rows.iter().any(|r| r.len() != header.len()) {
        return Err(Error::Parse("ragged CSV row".into()));
    }
    Ok((header, rows))
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

/// Machine-readable description of a failed run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub command: String,
    pub kind: String,
    pub message: String,
    pub exit_code: i32,
}

impl FailureRecord {
    pub fn from_error(command: &str, e: &Error, exit_code: i32) -> Self {
        FailureRecord { command: command.into(), kind: e.kind().into(), message: e.to_string(), exit_code }
    }
}

/// Single writer for the artifacts of one run.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(root: impl AsRef<Path>) -> Result<Self> {
        let root = root.as_ref().to_path_buf();
        fs::create_dir_all(&root).map_err(|e| Error::InvalidParameter(format!("cannot create {}: {e}", root.display())))?;
        Ok(OutputDir { root, written: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.root.join(name);
        fs::write(&path, contents).map_err(|e| Error::InvalidParameter(format!("cannot write {}: {e}", path.display())))?;
        self.written.push(path.clone());
        Ok(path)
    }

    /// Writes `<stem>.csv` and `<stem>.dat`.
    pub fn table(&mut self, stem: &str, t: &Table) -> Result<()> {
        self.write(&format!("{stem}.csv"), &t.to_csv())?;
        self.write(&format!("{stem}.dat"), &t.to_plot_data())?;
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        self.write(name, &to_json(value)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn csv_round_trip_with_quoting() {
        let mut t = Table::new(&["x", "label"]);
        t.push(vec![Cell::Num(0.1), "a,b".into()]).unwrap();
        t.push(vec![Cell::Missing, "say \"hi\"".into()]).unwrap();
        let (h, rows) = parse_csv(&t.to_csv()).unwrap();
        assert_eq!(h, ["x", "label"]);
        assert_eq!(rows[0][0].parse::<f64>().unwrap(), 0.1);
        assert_eq!(rows[0][1], "a,b");
        assert_eq!(rows[1], ["", "say \"hi\""]);
        assert!(t.push(vec![Cell::Int(1)]).is_err());
    }

    #[test]
    fn plot_data_and_text() {
        let mut t = Table::new(&["r", "ok"]);
        t.push(vec![2.0.into(), true.into()]).unwrap();
        assert_eq!(t.to_plot_data(), "# r ok\n2.0000000000000000e0 1\n");
        assert!(t.to_text().lines().count() == 2);
    }

    #[test]
    fn failure_record_json() {
        let f = FailureRecord::from_error("cmc-solve", &Error::NotConverged("x".into()), 1);
        let back: FailureRecord = from_json(&to_json(&f).unwrap()).unwrap();
        assert_eq!(back, f);
        assert_eq!(back.kind, "not-converged");
    }

    proptest! {
        #[test]
        fn floats_round_trip(v in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            prop_assert_eq!(format_f64(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }

        #[test]
        fn json_floats_round_trip(v in proptest::num::f64::NORMAL) {
            let back: Vec<f64> = from_json(&to_json(&vec![v]).unwrap()).unwrap();
            prop_assert_eq!(back[0].to_bits(), v.to_bits());
        }
    }
}
