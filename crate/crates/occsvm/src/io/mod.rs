//! Dataset, Gram-matrix and number formatting helpers.

mod csv;
mod gram;
mod svmlight;

use std::fs;
use std::path::Path;

use crate::error::{OccError, Result};

pub use self::csv::{load_csv, parse_csv, LabelColumn};
pub use self::gram::{load_gram, parse_gram};
pub use self::svmlight::{load_svmlight, parse_svmlight, to_svmlight_string, write_svmlight};

/// Formats `x` with 17 significant digits, enough to round-trip any `f64`.
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| OccError::io(path, e))
}

pub(crate) fn file_stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
}
