use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use crate::config::Format;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Bool(bool),
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Num(x as f64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl Cell {
    fn to_field(&self) -> String {
        match self {
            // `Display` for f64 prints the shortest string that parses back exactly
            Cell::Num(x) => format!("{x}"),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn from_field(s: &str) -> Self {
        match s {
            "true" => Cell::Bool(true),
            "false" => Cell::Bool(false),
            _ => s.parse::<f64>().map(Cell::Num).unwrap_or_else(|_| Cell::Text(s.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.columns.len() {
            bail!("row has {} cells, table has {} columns", row.len(), self.columns.len());
        }
        if let Some(Cell::Num(x)) = row.iter().find(|c| matches!(c, Cell::Num(x) if !x.is_finite())) {
            bail!("non-finite value {x} in output row");
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn push_numbers(&mut self, row: impl IntoIterator<Item = f64>) -> Result<()> {
        self.push(row.into_iter().map(Cell::Num).collect())
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[k]).collect())
    }
}

/// Single-row table serialized as an object in JSON.
pub fn record(fields: Vec<(&str, Cell)>) -> Result<Table> {
    let mut t = Table::new(fields.iter().map(|(k, _)| *k));
    t.push(fields.into_iter().map(|(_, v)| v).collect())?;
    Ok(t)
}

#[derive(Clone, Debug)]
pub struct Document {
    pub name: String,
    pub table: Table,
    /// Written as a JSON object instead of a column/row table.
    pub is_record: bool,
}

impl Document {
    pub fn table(name: &str, table: Table) -> Self {
        Self {
            name: name.to_string(),
            table,
            is_record: false,
        }
    }

    pub fn record(name: &str, fields: Vec<(&str, Cell)>) -> Result<Self> {
        Ok(Self {
            name: name.to_string(),
            table: record(fields)?,
            is_record: true,
        })
    }

    pub fn file_name(&self, format: Format) -> String {
        match format {
            Format::Csv => format!("{}.csv", self.name),
            Format::Json => format!("{}.json", self.name),
        }
    }

    pub fn write(&self, dir: &Path, format: Format) -> Result<PathBuf> {
        let path = dir.join(self.file_name(format));
        let bytes = match format {
            Format::Csv => to_csv(&self.table)?,
            Format::Json => {
                let mut text = if self.is_record {
                    let map: serde_json::Map<String, serde_json::Value> = self
                        .table
                        .columns
                        .iter()
                        .cloned()
                        .zip(self.table.rows[0].iter().map(|c| serde_json::to_value(c).unwrap()))
                        .collect();
                    serde_json::to_string_pretty(&map)?
                } else {
                    serde_json::to_string_pretty(&self.table)?
                };
                text.push('\n');
                text.into_bytes()
            }
        };
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

pub fn to_csv(table: &Table) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::to_field))?;
    }
    Ok(w.into_inner()?)
}

pub fn read_csv(path: &Path) -> Result<Table> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let columns = r.headers()?.iter().map(str::to_string).collect();
    let rows = r
        .records()
        .map(|rec| Ok(rec?.iter().map(Cell::from_field).collect()))
        .collect::<Result<Vec<_>>>()?;
    Ok(Table { columns, rows })
}

pub fn read_json(path: &Path) -> Result<Table> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    if value.get("columns").is_some() && value.get("rows").is_some() {
        return Ok(serde_json::from_value(value)?);
    }
    let map: serde_json::Map<String, serde_json::Value> = serde_json::from_value(value)?;
    let mut t = Table::new(map.keys().cloned());
    t.rows.push(
        map.values()
            .map(|v| serde_json::from_value(v.clone()))
            .collect::<serde_json::Result<Vec<Cell>>>()?,
    );
    Ok(t)
}
