use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::ExperimentConfig;
use crate::error::Result;
use crate::report::{all_pass, Verdict};

/// A printable value in a result table.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) if *v != 0.0 && (v.abs() < 1e-4 || v.abs() >= 1e12) => format!("{v:e}"),
            Cell::Float(v) => v.to_string(),
            Cell::Text(s) if s.contains(',') || s.contains('"') => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(v) => Some(*v as f64),
            Cell::Float(v) => Some(*v),
            Cell::Text(_) => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
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

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Rows where column `key` renders as `value`.
    pub fn find(&self, key: &str, value: &str) -> Vec<&[Cell]> {
        let Some(c) = self.column(key) else { return Vec::new() };
        self.rows
            .iter()
            .filter(|r| r[c].render() == value)
            .map(|r| r.as_slice())
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            s.push_str(&row.iter().map(Cell::render).collect::<Vec<_>>().join(","));
            s.push('\n');
        }
        s
    }
}

/// Everything a study produces.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub name: String,
    pub config: ExperimentConfig,
    pub table: Table,
    pub verdicts: Vec<Verdict>,
    /// Free-form scalars (e.g. the recorded constants) worth keeping.
    pub notes: Vec<(String, f64)>,
}

impl ExperimentReport {
    pub fn new(config: &ExperimentConfig, table: Table) -> Self {
        ExperimentReport {
            name: config.name.clone(),
            config: config.clone(),
            table,
            verdicts: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn all_pass(&self) -> bool {
        all_pass(&self.verdicts)
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.check_name == name)
    }

    pub fn note(&self, key: &str) -> Option<f64> {
        self.notes.iter().find(|(k, _)| k == key).map(|p| p.1)
    }

    pub fn verdicts_json(&self) -> String {
        let summary = serde_json::json!({
            "experiment": self.name,
            "all_pass": self.all_pass(),
            "notes": self.notes.iter().map(|(k, v)| (k.clone(), serde_json::json!(v))).collect::<serde_json::Map<_, _>>(),
            "verdicts": self.verdicts,
        });
        serde_json::to_string_pretty(&summary).expect("report serializes") + "\n"
    }

    /// Write `<name>.csv` and `<name>.verdicts.json` under `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let csv = dir.join(format!("{}.csv", self.name));
        let json = dir.join(format!("{}.verdicts.json", self.name));
        fs::write(&csv, self.table.to_csv())?;
        fs::write(&json, self.verdicts_json())?;
        Ok(vec![csv, json])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_text_with_commas() {
        let mut t = Table::new(&["a", "b", "c"]);
        t.push(vec![1usize.into(), 0.5.into(), "x,y".into()]);
        assert_eq!(t.to_csv(), "a,b,c\n1,0.5,\"x,y\"\n");
        assert_eq!(t.find("a", "1").len(), 1);
    }
}
