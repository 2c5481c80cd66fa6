// Copyright 2026 The cfpe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Result records and their CSV / JSON serialization.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::ExperimentConfig;
use super::CliError;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
    Empty,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Num(v) => write!(f, "{v}"),
            Cell::Text(s) => f.write_str(s),
            Cell::Empty => Ok(()),
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

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
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

/// Table with a fixed, documented column order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Series {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Series {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Series { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        w.write_record(&self.columns).map_err(|e| CliError::Io(e.to_string()))?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string())).map_err(|e| CliError::Io(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

/// Everything one experiment produced, together with the configuration that
/// produced it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRecord {
    pub experiment: String,
    pub command: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub scalars: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub series: Vec<Series>,
    /// CSV files holding the series when they are not inlined.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub series_files: Vec<String>,
    pub notes: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Run metadata that is not part of the reproducible output.
#[derive(Serialize)]
struct Meta<'a> {
    experiment: &'a str,
    timestamp_unix: u64,
    version: &'a str,
}

fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let tmp = path.with_extension(format!("{}.tmp", path.extension().and_then(|e| e.to_str()).unwrap_or("")));
    std::fs::write(&tmp, contents).map_err(|e| CliError::Io(format!("{}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn record_json(record: &ResultRecord) -> String {
    let mut s = serde_json::to_string_pretty(record).expect("record serializes");
    s.push('\n');
    s
}

/// Writes the record under `dir` and returns the files written.
///
/// `json`: `<id>.json` with series inline. `csv`: `<id>.<series>.csv` per
/// series plus `<id>.json` listing them. Both formats also write
/// `<id>.meta.json` with the wall-clock timestamp.
pub fn write_record(record: &ResultRecord, dir: &Path, format: Format) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let mut written = Vec::new();
    let mut rec = record.clone();
    if format == Format::Csv {
        for s in &record.series {
            let name = format!("{}.{}.csv", record.experiment, s.name);
            let path = dir.join(&name);
            write_atomic(&path, &s.to_csv()?)?;
            written.push(path);
            rec.series_files.push(name);
        }
        rec.series.clear();
    }
    let path = dir.join(format!("{}.json", record.experiment));
    write_atomic(&path, &record_json(&rec))?;
    written.push(path);

    let ts = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let meta = Meta { experiment: &record.experiment, timestamp_unix: ts, version: &record.version };
    let path = dir.join(format!("{}.meta.json", record.experiment));
    write_atomic(&path, &(serde_json::to_string_pretty(&meta).expect("meta serializes") + "\n"))?;
    written.push(path);
    Ok(written)
}

/// Text printed to stdout when no output directory is given.
pub fn render(record: &ResultRecord, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => Ok(record_json(record)),
        Format::Csv => {
            let mut out = String::new();
            for (i, s) in record.series.iter().enumerate() {
                if i > 0 {
                    out.push_str("\r\n");
                }
                out.push_str(&s.to_csv()?);
            }
            Ok(out)
        }
    }
}
