//! Comma-separated tables with one label column.
//!
//! A first row that contains any non-numeric field is taken as a header and
//! its names are recorded. Lines starting with `#` are comments.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use occsvm_core::{Dataset, Label, Matrix, SourceFormat};

use super::{file_stem, read_text};
use crate::error::{OccError, Result};

const WHAT: &str = "csv";

/// Which column holds the labels.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum LabelColumn {
    /// The last column.
    #[default]
    Last,
    /// 0-based column index.
    Index(usize),
    /// Header name.
    Name(String),
}

impl FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    /// Integers select by index, `last` the final column, anything else a name.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) if s == "last" => LabelColumn::Last,
            Err(_) => LabelColumn::Name(s.to_string()),
        })
    }
}

impl fmt::Display for LabelColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelColumn::Last => f.write_str("last"),
            LabelColumn::Index(i) => write!(f, "{i}"),
            LabelColumn::Name(n) => f.write_str(n),
        }
    }
}

pub fn parse_csv(text: &str, name: &str, label: &LabelColumn) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            OccError::parse(WHAT, format!("row {line}"), e.to_string())
        })?;
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        records.push((line, rec));
    }

    let is_numeric = |s: &str| s.parse::<f64>().is_ok();
    let header = match records.first() {
        Some((_, first)) if !first.iter().all(is_numeric) => {
            let names: Vec<String> = first.iter().map(str::to_string).collect();
            records.remove(0);
            Some(names)
        }
        _ => None,
    };
    let width = match (&header, records.first()) {
        (Some(h), _) => h.len(),
        (None, Some((_, r))) => r.len(),
        (None, None) => 0,
    };
    if records.is_empty() {
        return Err(OccError::EmptyDataset(name.to_string()));
    }
    if width < 2 {
        return Err(OccError::Usage(format!("{name}: need at least one feature column and a label column")));
    }

    let label_idx = match label {
        LabelColumn::Last => width - 1,
        LabelColumn::Index(i) if *i < width => *i,
        LabelColumn::Index(i) => {
            return Err(OccError::Usage(format!("label column {i} out of range for {width} columns")));
        }
        LabelColumn::Name(n) => header
            .as_ref()
            .and_then(|h| h.iter().position(|c| c == n))
            .ok_or_else(|| OccError::Usage(format!("label column {n:?} not found in header of {name}")))?,
    };

    let dim = width - 1;
    let mut data = Vec::with_capacity(records.len() * dim);
    let mut labels = Vec::with_capacity(records.len());
    for (line, rec) in &records {
        if rec.len() != width {
            return Err(OccError::parse(
                WHAT,
                format!("row {line}"),
                format!("expected {width} columns, found {}", rec.len()),
            ));
        }
        for (j, field) in rec.iter().enumerate() {
            let value: f64 = field.parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| {
                OccError::parse(WHAT, format!("row {line}, column {}", j + 1), format!("{field:?} is not a finite number"))
            })?;
            if j == label_idx {
                labels.push(Label::from_source(value));
            } else {
                data.push(value);
            }
        }
    }

    let features = Matrix::from_row_major(labels.len(), dim, data)?;
    let mut ds = Dataset::new(name, features, labels, SourceFormat::Csv)?;
    ds.feature_names = header.map(|mut h| {
        h.remove(label_idx);
        h
    });
    Ok(ds)
}

pub fn load_csv(path: &Path, label: &LabelColumn) -> Result<Dataset> {
    parse_csv(&read_text(path)?, &file_stem(path), label)
}
