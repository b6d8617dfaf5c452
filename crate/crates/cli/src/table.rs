//! In-memory tables and their CSV form.
//!
//! Output is RFC 4180: comma separated, CRLF record terminators, quoting
//! only when needed, UTF-8, header first. Numbers use Rust's shortest
//! round-trip `f64` formatting, so every value reads back bit-identical.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Text(_) => None,
        }
    }

    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v}"),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of column `name`; `None` if absent or non-numeric.
    pub fn numeric_column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        self.rows.iter().map(|r| r[i].as_f64()).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .terminator(csv::Terminator::CRLF)
            .from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    /// Writes the CSV form to `path`, creating missing parent directories.
    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        create_parent(path)?;
        let file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
            .map_err(|e| CliError::io(path, e))
    }

    /// Parses CSV with a header row. Cells that parse as `f64` become
    /// numbers, anything else text. `source` names the input in errors.
    pub fn read_csv<R: Read>(input: R, source: &str) -> Result<Table> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let parse_err = |e: csv::Error| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            CliError::Parse {
                file: source.to_owned(),
                line,
                message: e.to_string(),
            }
        };
        let columns: Vec<String> = reader
            .headers()
            .map_err(parse_err)?
            .iter()
            .map(|h| h.trim().to_owned())
            .collect();
        if columns.iter().all(String::is_empty) {
            return Err(CliError::Parse {
                file: source.to_owned(),
                line: 1,
                message: "missing header row".into(),
            });
        }
        let mut table = Table::new(columns);
        for record in reader.records() {
            let record = record.map_err(parse_err)?;
            let row = record
                .iter()
                .map(|cell| {
                    let cell = cell.trim();
                    cell.parse::<f64>()
                        .map(Cell::Num)
                        .unwrap_or_else(|_| Cell::Text(cell.to_owned()))
                })
                .collect();
            table.rows.push(row);
        }
        Ok(table)
    }

    pub fn read_csv_file(path: &Path) -> Result<Table> {
        let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
        Self::read_csv(std::io::BufReader::new(file), &path.display().to_string())
    }

    /// Long format (`key`, `t`, value columns) to wide format with one
    /// `{value}[{key}={k}]` column per distinct key `k`, in first-seen order. Rows
    /// align on `t`.
    pub fn pivot_wide(&self, key: &str, value: &str) -> Option<Table> {
        let ki = self.column_index(key)?;
        let ti = self.column_index("t")?;
        let vi = self.column_index(value)?;
        let mut keys: Vec<String> = Vec::new();
        let mut times: Vec<f64> = Vec::new();
        for row in &self.rows {
            let k = row[ki].render();
            if !keys.contains(&k) {
                keys.push(k);
            }
            let t = row[ti].as_f64()?;
            if !times.contains(&t) {
                times.push(t);
            }
        }
        let mut wide =
            Table::new(std::iter::once("t".to_owned()).chain(keys.iter().map(|k| format!("{value}[{key}={k}]"))));
        for &t in &times {
            let mut row = vec![Cell::Num(t)];
            for k in &keys {
                let v = self
                    .rows
                    .iter()
                    .find(|r| r[ti].as_f64() == Some(t) && &r[ki].render() == k)
                    .and_then(|r| r[vi].as_f64())
                    .unwrap_or(f64::NAN);
                row.push(Cell::Num(v));
            }
            wide.push(row);
        }
        Some(wide)
    }
}

fn create_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e)),
        _ => Ok(()),
    }
}
