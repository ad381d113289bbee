//! CSV and JSON artifacts.
//!
//! Floats are written with 12 significant digits in scientific notation
//! (`{:.11e}`), never with shortest-round-trip formatting, so identical runs
//! produce byte-identical files. Non-finite floats become `null` in JSON and
//! `nan`/`inf` in CSV.
//!
//! JSON layout: `{format_version, command, config_echo, rows, verdicts}` plus
//! `partial` when a scan was cut short. CSV layout: header row, one line per
//! row, then one `# key,value` line per verdict.

use std::io::Write;

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;
use serde_json::value::RawValue;

use crate::error::Result;

pub const FORMAT_VERSION: u32 = 1;

pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        x.to_string().to_lowercase()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn csv_text(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format_float(*v),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(v) => v.clone(),
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

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(i64::from(v))
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
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

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Cell::Int(v) => s.serialize_i64(*v),
            Cell::Bool(v) => s.serialize_bool(*v),
            Cell::Text(v) => s.serialize_str(v),
            Cell::Float(v) if v.is_finite() => RawValue::from_string(format_float(*v))
                .map_err(serde::ser::Error::custom)?
                .serialize(s),
            Cell::Float(_) => s.serialize_none(),
        }
    }
}

/// Ordered key/value record; keys keep insertion order in the output.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record(pub Vec<(String, Cell)>);

impl Record {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: impl Into<Cell>) -> Self {
        self.0.push((key.to_string(), value.into()));
        self
    }

    pub fn push(&mut self, key: &str, value: impl Into<Cell>) {
        self.0.push((key.to_string(), value.into()));
    }

    pub fn get(&self, key: &str) -> Option<&Cell> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }
}

impl Serialize for Record {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub command: String,
    pub config_echo: Record,
    pub rows: Vec<Record>,
    pub verdicts: Record,
    pub partial: bool,
}

impl Serialize for Artifact {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(None)?;
        map.serialize_entry("format_version", &FORMAT_VERSION)?;
        map.serialize_entry("command", &self.command)?;
        map.serialize_entry("config_echo", &self.config_echo)?;
        map.serialize_entry("rows", &self.rows)?;
        map.serialize_entry("verdicts", &self.verdicts)?;
        if self.partial {
            map.serialize_entry("partial", &true)?;
        }
        map.end()
    }
}

impl Artifact {
    pub fn new(command: &str, config_echo: Record) -> Self {
        Self {
            command: command.to_string(),
            config_echo,
            rows: Vec::new(),
            verdicts: Record::new(),
            partial: false,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(self.to_json()?.as_bytes())?;
        Ok(())
    }

    /// Header from the first row's keys; verdicts as trailing `#` lines.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        {
            let mut writer = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(&mut out);
            if let Some(first) = self.rows.first() {
                writer
                    .write_record(first.0.iter().map(|(k, _)| k.as_str()))
                    .map_err(csv_error)?;
            }
            for row in &self.rows {
                writer
                    .write_record(row.0.iter().map(|(_, v)| v.csv_text()))
                    .map_err(csv_error)?;
            }
            writer.flush()?;
        }
        if self.partial {
            writeln!(out, "# partial,true")?;
        }
        for (k, v) in &self.verdicts.0 {
            writeln!(out, "# {k},{}", v.csv_text())?;
        }
        Ok(())
    }
}

fn csv_error(e: csv::Error) -> crate::error::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io.into(),
        other => std::io::Error::other(format!("{other:?}")).into(),
    }
}
