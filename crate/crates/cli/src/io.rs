//! CSV reading and writing.
//!
//! Input is one or two comma-separated columns (`value` or `label,value`),
//! with an optional header row recognized by a non-numeric value cell.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, Trim, WriterBuilder};
use lpfilter_core::Series;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReadError {
    #[error("cannot read input: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("input contains no observations")]
    Empty,
    #[error("row {row}: expected {expected} columns, found {found}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}: expected 1 or 2 columns, found {found}")]
    Columns { row: usize, found: usize },
    #[error("row {row}: non-numeric value {value:?}")]
    NonNumeric { row: usize, value: String },
    #[error(transparent)]
    Series(#[from] lpfilter_core::Error),
}

fn value_cell(record: &StringRecord) -> &str {
    record.get(record.len() - 1).unwrap_or("")
}

pub fn read_series_csv<R: Read>(source: R) -> Result<Series, ReadError> {
    let mut reader = ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(Trim::All)
        .from_reader(source);
    let records = reader.records().collect::<Result<Vec<_>, _>>()?;
    let Some(first) = records.first() else {
        return Err(ReadError::Empty);
    };
    let width = first.len();
    if width == 0 || width > 2 {
        return Err(ReadError::Columns {
            row: 1,
            found: width,
        });
    }
    let header = value_cell(first).parse::<f64>().is_err();
    let mut values = Vec::with_capacity(records.len());
    let mut labels = Vec::with_capacity(records.len());
    for (i, record) in records.iter().enumerate().skip(usize::from(header)) {
        let row = i + 1;
        if record.len() != width {
            return Err(ReadError::Ragged {
                row,
                expected: width,
                found: record.len(),
            });
        }
        let cell = value_cell(record);
        let value = cell.parse::<f64>().map_err(|_| ReadError::NonNumeric {
            row,
            value: cell.to_string(),
        })?;
        values.push(value);
        if width == 2 {
            labels.push(record[0].to_string());
        }
    }
    if values.is_empty() {
        return Err(ReadError::Empty);
    }
    Ok(if width == 2 {
        Series::with_labels(values, labels)?
    } else {
        Series::new(values)?
    })
}

pub fn read_series_path(path: &Path) -> Result<Series, ReadError> {
    read_series_csv(File::open(path)?)
}

/// How numbers are printed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NumberFormat {
    /// Fixed-point with the given number of decimals.
    Decimals(usize),
    /// 17 significant digits, enough to reproduce every `f64` exactly.
    Full,
}

impl Default for NumberFormat {
    fn default() -> Self {
        NumberFormat::Decimals(6)
    }
}

impl NumberFormat {
    pub fn format(self, x: f64) -> String {
        if !x.is_finite() {
            return if x.is_nan() {
                "nan".into()
            } else if x > 0.0 {
                "inf".into()
            } else {
                "-inf".into()
            };
        }
        let s = match self {
            NumberFormat::Decimals(p) => format!("{x:.p$}"),
            NumberFormat::Full => significant17(x),
        };
        // "-0.000000" carries no information beyond "0.000000"
        match s.strip_prefix('-') {
            Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_string(),
            _ => s,
        }
    }

    pub fn format_opt(self, x: Option<f64>) -> String {
        x.map(|v| self.format(v)).unwrap_or_default()
    }
}

fn significant17(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let exponent = x.abs().log10().floor() as i32;
    if (-5..16).contains(&exponent) {
        let decimals = (16 - exponent).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.16e}")
    }
}

/// Rows of string cells written as comma-separated text with LF endings.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, sink: W) -> csv::Result<()> {
        let mut writer = WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(sink);
        writer.write_record(&self.header)?;
        for row in &self.rows {
            writer.write_record(row)?;
        }
        writer.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("cells are UTF-8")
    }
}

/// `label,value` (or `value` for unlabeled series) at full precision.
pub fn series_table(series: &Series) -> Table {
    let fmt = NumberFormat::Full;
    match series.labels() {
        Some(labels) => {
            let mut t = Table::new(["label", "value"]);
            for (l, v) in labels.iter().zip(series.values()) {
                t.push(vec![l.clone(), fmt.format(*v)]);
            }
            t
        }
        None => {
            let mut t = Table::new(["value"]);
            for v in series.values() {
                t.push(vec![fmt.format(*v)]);
            }
            t
        }
    }
}
