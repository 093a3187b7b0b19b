//! Dense Gram-matrix text layout: the first line holds `n`, followed by `n`
//! lines of `n` whitespace-separated numbers. Symmetry is required; positive
//! semidefiniteness is not checked.

use std::path::Path;

use occsvm_core::{GramMatrix, Matrix};

use super::read_text;
use crate::error::{OccError, Result};

const WHAT: &str = "gram";

pub fn parse_gram(text: &str) -> Result<GramMatrix> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (first_no, first) = lines.next().ok_or_else(|| OccError::EmptyDataset("Gram matrix file".into()))?;
    let n: usize = first
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| OccError::parse(WHAT, format!("line {}", first_no + 1), "first line must be a positive size"))?;

    let mut data = Vec::with_capacity(n * n);
    for row in 0..n {
        let (no, line) = lines
            .next()
            .ok_or_else(|| OccError::parse(WHAT, "end of input", format!("expected {n} rows, found {row}")))?;
        let at = || format!("line {}", no + 1);
        let before = data.len();
        for tok in line.split_whitespace() {
            let v: f64 = tok.parse().map_err(|_| OccError::parse(WHAT, at(), format!("{tok:?} is not a number")))?;
            if !v.is_finite() {
                return Err(OccError::parse(WHAT, at(), format!("entry {tok} is not finite")));
            }
            data.push(v);
        }
        if data.len() - before != n {
            return Err(OccError::parse(WHAT, at(), format!("expected {n} entries, found {}", data.len() - before)));
        }
    }
    if let Some((no, _)) = lines.next() {
        return Err(OccError::parse(WHAT, format!("line {}", no + 1), "unexpected trailing row"));
    }
    Ok(GramMatrix::from_matrix(Matrix::from_row_major(n, n, data)?)?)
}

pub fn load_gram(path: &Path) -> Result<GramMatrix> {
    parse_gram(&read_text(path)?)
}
