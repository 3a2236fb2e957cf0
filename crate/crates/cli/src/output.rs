//! Tabular results and their CSV / JSON encodings.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::Format;

/// Significant digits written for every floating-point cell.
pub const SIG_DIGITS: usize = 12;
pub const OUTPUT_DIR_ENV: &str = "THERMOQ_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Empty, Into::into)
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => sci(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number),
            Cell::Int(i) => Value::from(*i),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Empty => Value::Null,
        }
    }
}

/// `d.ddddddddddde±XX` with [`SIG_DIGITS`] significant digits.
pub fn sci(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    format!("{mantissa}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
}

/// Ordered `(column, value)` pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Row(pub Vec<(String, Cell)>);

impl Row {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, column: impl Into<String>, value: impl Into<Cell>) -> &mut Self {
        self.0.push((column.into(), value.into()));
        self
    }

    pub fn get(&self, column: &str) -> Option<&Cell> {
        self.0.iter().find(|(c, _)| c == column).map(|(_, v)| v)
    }
}

/// Columns always placed last, after every data column.
const TRAILING: [&str; 2] = ["status", "flags"];

/// Header: union of row columns in first-seen order, verdict columns last.
pub fn header(rows: &[Row]) -> Vec<String> {
    let mut cols: Vec<String> = Vec::new();
    for row in rows {
        for (c, _) in &row.0 {
            if !cols.contains(c) && !TRAILING.contains(&c.as_str()) {
                cols.push(c.clone());
            }
        }
    }
    for t in TRAILING {
        if rows.iter().any(|r| r.get(t).is_some()) {
            cols.push(t.to_string());
        }
    }
    cols
}

pub fn comment_line(config_hash: &str) -> String {
    format!("# thermoq {} config-hash {config_hash}", env!("CARGO_PKG_VERSION"))
}

pub fn write_csv(out: impl Write, rows: &[Row], config_hash: &str) -> anyhow::Result<()> {
    let mut out = out;
    writeln!(out, "{}", comment_line(config_hash))?;
    let cols = header(rows);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&cols)?;
    for row in rows {
        w.write_record(cols.iter().map(|c| row.get(c).map_or(String::new(), Cell::csv)))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct JsonTable<'a> {
    tool: &'static str,
    version: &'static str,
    config_hash: &'a str,
    columns: Vec<String>,
    rows: Vec<Map<String, Value>>,
}

pub fn write_json(out: impl Write, rows: &[Row], config_hash: &str) -> anyhow::Result<()> {
    let table = JsonTable {
        tool: "thermoq",
        version: env!("CARGO_PKG_VERSION"),
        config_hash,
        columns: header(rows),
        rows: rows
            .iter()
            .map(|r| r.0.iter().map(|(c, v)| (c.clone(), v.json())).collect())
            .collect(),
    };
    serde_json::to_writer_pretty(out, &table)?;
    Ok(())
}

pub fn write_table(path: &Path, format: Format, rows: &[Row], config_hash: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    match format {
        Format::Csv => write_csv(file, rows, config_hash),
        Format::Json => write_json(file, rows, config_hash),
    }
}

/// Where a result file goes. With the override variable set, only the file
/// name of `requested` is kept and placed in that directory.
pub fn resolve_output(requested: Option<&str>, default_name: &str) -> PathBuf {
    let requested = PathBuf::from(requested.unwrap_or(default_name));
    match std::env::var_os(OUTPUT_DIR_ENV).filter(|v| !v.is_empty()) {
        Some(dir) => PathBuf::from(dir).join(requested.file_name().unwrap_or(default_name.as_ref())),
        None => requested,
    }
}

/// `results/run.csv` → `results/run.report.json`.
pub fn report_path(table: &Path) -> PathBuf {
    let stem = table.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "thermoq".into());
    table.with_file_name(format!("{stem}.report.json"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scientific_format_has_twelve_digits_and_signed_exponent() {
        assert_eq!(sci(1.0), "1.00000000000e+00");
        assert_eq!(sci(-0.0400000000001), "-4.00000000001e-02");
        assert_eq!(sci(6.02214076e23), "6.02214076000e+23");
        assert_eq!(sci(1.5e-300), "1.50000000000e-300");
        assert_eq!(sci(0.0), "0.00000000000e+00");
        assert_eq!(sci(f64::NAN), "NaN");
    }

    #[test]
    fn formatted_values_round_trip_to_twelve_digits() {
        for &x in &[std::f64::consts::PI, -1.0 / 3.0, 1.042190e-7, 12345.678901234] {
            let back: f64 = sci(x).parse().unwrap();
            assert!((back - x).abs() <= 5e-12 * x.abs(), "{x} -> {}", sci(x));
        }
    }

    #[test]
    fn csv_has_comment_header_and_blank_missing_cells() {
        let mut a = Row::new();
        a.push("beta", 1.0).push("status", "ok");
        let mut b = Row::new();
        b.push("beta", 2.0).push("n_max", 7usize).push("status", "error");
        let mut buf = Vec::new();
        write_csv(&mut buf, &[a, b], "abc").unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# thermoq ") && lines[0].ends_with("config-hash abc"));
        assert_eq!(lines[1], "beta,n_max,status");
        assert_eq!(lines[2], "1.00000000000e+00,,ok");
        assert_eq!(lines[3], "2.00000000000e+00,7,error");
    }

    #[test]
    fn report_sits_next_to_table() {
        assert_eq!(report_path(Path::new("out/run.csv")), PathBuf::from("out/run.report.json"));
    }
}
