//! Series ingestion and CSV output.

use std::fs;
use std::path::Path;

use fdboot_core::spectral::TimeSeries;

use crate::error::{CliError, Result};

/// Which field of each record holds the value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Column {
    Index(usize),
    Name(String),
}

impl Column {
    pub fn parse(s: &str) -> Column {
        match s.trim().parse::<usize>() {
            Ok(i) => Column::Index(i),
            Err(_) => Column::Name(s.trim().to_string()),
        }
    }
}

/// Numeric rows of a delimited file: `(line number, fields)`.
#[derive(Debug, Clone)]
pub struct Table {
    pub header: Option<Vec<String>>,
    pub rows: Vec<(usize, Vec<String>)>,
}

fn sniff_delimiter(text: &str) -> u8 {
    let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    if first.contains(';') {
        b';'
    } else if first.contains('\t') {
        b'\t'
    } else {
        b','
    }
}

fn is_number(s: &str) -> bool {
    s.trim().parse::<f64>().is_ok()
}

/// Parses delimited text. A first record with no numeric field is taken as a header.
pub fn parse_table(text: &str) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .delimiter(sniff_delimiter(text))
        .from_reader(text.as_bytes());
    let mut header = None;
    let mut rows = Vec::new();
    for (k, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Input(format!("malformed CSV: {e}")))?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(k + 1);
        let fields: Vec<String> = rec.iter().map(|f| f.trim().to_string()).collect();
        if fields.iter().all(|f| f.is_empty()) {
            continue;
        }
        if header.is_none() && rows.is_empty() && !fields.iter().any(|f| is_number(f)) {
            header = Some(fields);
            continue;
        }
        rows.push((line, fields));
    }
    Ok(Table { header, rows })
}

impl Table {
    fn column_index(&self, column: &Column) -> Result<usize> {
        match column {
            Column::Index(i) => Ok(*i),
            Column::Name(name) => self
                .header
                .as_ref()
                .and_then(|h| h.iter().position(|c| c == name))
                .ok_or_else(|| CliError::Input(format!("no column named '{name}'"))),
        }
    }

    /// Values of one column; any non-numeric entry is an error.
    pub fn column(&self, column: &Column) -> Result<Vec<f64>> {
        let idx = self.column_index(column)?;
        self.rows
            .iter()
            .map(|(line, fields)| {
                let raw = fields
                    .get(idx)
                    .ok_or_else(|| CliError::Input(format!("line {line}: no field {idx}")))?;
                match raw.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(CliError::Input(format!("line {line}: '{raw}' is not a finite number"))),
                }
            })
            .collect()
    }

    /// Keeps rows whose first field lies in `[lo, hi]` (e.g. a year column).
    pub fn filter_first_field(&self, lo: f64, hi: f64) -> Result<Table> {
        let mut rows = Vec::new();
        for (line, fields) in &self.rows {
            let key: f64 = fields[0]
                .parse()
                .map_err(|_| CliError::Input(format!("line {line}: '{}' is not a number", fields[0])))?;
            if key >= lo && key <= hi {
                rows.push((*line, fields.clone()));
            }
        }
        Ok(Table { header: self.header.clone(), rows })
    }
}

pub fn read_table(path: &Path) -> Result<Table> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_table(&text)
}

pub fn series_from_values(values: Vec<f64>, source: &Path) -> Result<TimeSeries> {
    if values.is_empty() {
        return Err(CliError::Input(format!("{} contains no data", source.display())));
    }
    Ok(TimeSeries::new(values)?)
}

/// Reads one column of a delimited file as a time series.
pub fn read_series(path: &Path, column: &Column) -> Result<TimeSeries> {
    let values = read_table(path)?.column(column)?;
    series_from_values(values, path)
}

/// Writes rows of numbers under a header line.
pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let fail = |e: csv::Error| CliError::Input(format!("{}: {e}", path.display()));
    w.write_record(header).map_err(fail)?;
    for r in rows {
        w.write_record(r.iter().map(|v| format!("{v:e}"))).map_err(fail)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn ensure_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_column() {
        let t = parse_table("1.5\n-2\n\n3e-1\n").unwrap();
        assert!(t.header.is_none());
        assert_eq!(t.column(&Column::Index(0)).unwrap(), vec![1.5, -2.0, 0.3]);
    }

    #[test]
    fn header_and_named_column() {
        let t = parse_table("year,value\n1700,8.3\n1701,18.3\n").unwrap();
        assert_eq!(t.column(&Column::parse("value")).unwrap(), vec![8.3, 18.3]);
        assert_eq!(t.column(&Column::parse("0")).unwrap(), vec![1700.0, 1701.0]);
    }

    #[test]
    fn semicolon_layout_with_padding() {
        let text = "1700.5;    8.3; -1.0;   -1;1\n1701.5;   18.3; -1.0;   -1;1\n1702.5;   26.7; -1.0;   -1;1\n";
        let t = parse_table(text).unwrap();
        assert_eq!(t.column(&Column::Index(1)).unwrap(), vec![8.3, 18.3, 26.7]);
        let f = t.filter_first_field(1700.0, 1701.9).unwrap();
        assert_eq!(f.rows.len(), 2);
    }

    #[test]
    fn non_numeric_row_is_input_error() {
        let t = parse_table("1\n2\nabc\n4\n").unwrap();
        let e = t.column(&Column::Index(0)).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("line 3"), "{e}");
    }

    #[test]
    fn missing_field_and_unknown_name() {
        let t = parse_table("1,2\n3\n").unwrap();
        assert!(t.column(&Column::Index(1)).is_err());
        assert!(t.column(&Column::parse("x")).is_err());
    }

    #[test]
    fn nan_rejected() {
        let t = parse_table("1\nNaN\n").unwrap();
        assert!(t.column(&Column::Index(0)).is_err());
    }

    proptest::proptest! {
        #[test]
        fn written_values_read_back_exactly(v in proptest::collection::vec(-1e12f64..1e12, 1..50), semi in proptest::bool::ANY) {
            let text: String = if semi {
                v.iter().enumerate().map(|(i, x)| format!("{};{x}\n", 1700 + i)).collect()
            } else {
                v.iter().map(|x| format!("{x}\n")).collect()
            };
            let col = if semi { 1 } else { 0 };
            proptest::prop_assert_eq!(parse_table(&text).unwrap().column(&Column::Index(col)).unwrap(), v);
        }
    }
}
