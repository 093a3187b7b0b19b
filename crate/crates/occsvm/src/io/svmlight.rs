//! The svmlight text format: one example per line,
//!
//! ```text
//! <label> <index>:<value> <index>:<value> ... [# comment]
//! ```
//!
//! with 1-based feature indices. Absent features are zero. A label equal to
//! `1` marks the positive class; every other label is negative.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use occsvm_core::{Dataset, Label, Matrix, SourceFormat};

use super::{file_stem, read_text, sig17};
use crate::error::{OccError, Result};

const WHAT: &str = "svmlight";

/// Parses svmlight text. Rows are densified to `max(largest index, min_dim)`
/// columns; pass the model dimension as `min_dim` when scoring a file whose
/// trailing features happen to be zero everywhere.
pub fn parse_svmlight(text: &str, name: &str, min_dim: usize) -> Result<Dataset> {
    let mut labels = Vec::new();
    let mut sparse_rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut dim = min_dim;

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let at = || format!("line {}", lineno + 1);
        let mut tokens = line.split_whitespace();
        let label_tok = tokens.next().unwrap_or_default();
        let label: f64 = label_tok
            .parse()
            .map_err(|_| OccError::parse(WHAT, at(), format!("label {label_tok:?} is not a number")))?;

        let mut row = Vec::new();
        for tok in tokens {
            if tok.starts_with("qid:") {
                continue;
            }
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| OccError::parse(WHAT, at(), format!("expected <index>:<value>, got {tok:?}")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| OccError::parse(WHAT, at(), format!("feature index {idx:?} is not a positive integer")))?;
            if idx == 0 {
                return Err(OccError::parse(WHAT, at(), "feature indices are 1-based"));
            }
            let val: f64 = val
                .parse()
                .map_err(|_| OccError::parse(WHAT, at(), format!("feature value {val:?} is not a number")))?;
            if !val.is_finite() {
                return Err(OccError::parse(WHAT, at(), format!("feature {idx} is not finite")));
            }
            if row.iter().any(|&(j, _)| j == idx - 1) {
                return Err(OccError::parse(WHAT, at(), format!("feature index {idx} repeated")));
            }
            dim = dim.max(idx);
            row.push((idx - 1, val));
        }
        labels.push(Label::from_source(label));
        sparse_rows.push(row);
    }

    if labels.is_empty() {
        return Err(OccError::EmptyDataset(name.to_string()));
    }
    if dim == 0 {
        return Err(OccError::parse(WHAT, "end of input", "no features present"));
    }
    let mut data = vec![0.0; labels.len() * dim];
    for (i, row) in sparse_rows.iter().enumerate() {
        for &(j, v) in row {
            data[i * dim + j] = v;
        }
    }
    let features = Matrix::from_row_major(labels.len(), dim, data)?;
    Ok(Dataset::new(name, features, labels, SourceFormat::Svmlight)?)
}

/// Reads an svmlight file; the dataset is named after the file stem.
pub fn load_svmlight(path: &Path, min_dim: usize) -> Result<Dataset> {
    parse_svmlight(&read_text(path)?, &file_stem(path), min_dim)
}

/// Renders `ds` as svmlight text, omitting zero features and writing values
/// with 17 significant digits.
pub fn to_svmlight_string(ds: &Dataset) -> String {
    let mut out = String::new();
    for (row, label) in ds.features().row_iter().zip(ds.labels()) {
        out.push_str(if label.is_positive() { "1" } else { "-1" });
        for (j, &v) in row.iter().enumerate() {
            if v != 0.0 {
                let _ = write!(out, " {}:{}", j + 1, sig17(v));
            }
        }
        out.push('\n');
    }
    out
}

pub fn write_svmlight(ds: &Dataset, mut out: impl Write) -> std::io::Result<()> {
    out.write_all(to_svmlight_string(ds).as_bytes())
}
