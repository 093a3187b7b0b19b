//! In-memory labeled datasets, min-max scaling and the one-class
//! train/test split.
//!
//! Labels follow one rule everywhere: a source label equal to `1` is the
//! positive (target) class, anything else is negative.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    /// `1` maps to [`Label::Positive`], every other value to [`Label::Negative`].
    pub fn from_source(value: f64) -> Label {
        if value == 1.0 {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    /// Tie at zero is an inlier.
    pub fn from_score(score: f64) -> Label {
        if score >= 0.0 {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Label::Positive => 1,
            Label::Negative => -1,
        }
    }

    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Positive => "+1",
            Label::Negative => "-1",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceFormat {
    Svmlight,
    Csv,
    InMemory,
}

impl SourceFormat {
    pub fn name(self) -> &'static str {
        match self {
            SourceFormat::Svmlight => "svmlight",
            SourceFormat::Csv => "csv",
            SourceFormat::InMemory => "memory",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Matrix,
    labels: Vec<Label>,
    pub name: String,
    pub source_format: SourceFormat,
    pub scaled: bool,
    /// Column names, when the source had a header.
    pub feature_names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        features: Matrix,
        labels: Vec<Label>,
        source_format: SourceFormat,
    ) -> Result<Self> {
        if features.rows() != labels.len() {
            return Err(Error::InvalidInput(format!(
                "{} feature rows but {} labels",
                features.rows(),
                labels.len()
            )));
        }
        Ok(Dataset {
            features,
            labels,
            name: name.into(),
            source_format,
            scaled: false,
            feature_names: None,
        })
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn n_positive(&self) -> usize {
        self.labels.iter().filter(|l| l.is_positive()).count()
    }

    /// Rows at `indices`, in that order, with the metadata carried over.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            name: self.name.clone(),
            source_format: self.source_format,
            scaled: self.scaled,
            feature_names: self.feature_names.clone(),
        }
    }

    /// Only the rows labeled positive.
    pub fn positives(&self) -> Dataset {
        let idx: Vec<usize> = (0..self.len()).filter(|&i| self.labels[i].is_positive()).collect();
        self.subset(&idx)
    }
}

/// Per-column min-max scaling parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxScaler {
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(x: &Matrix) -> Result<Self> {
        if x.rows() == 0 {
            return Err(Error::InvalidInput("cannot fit a scaler on zero rows".into()));
        }
        let mut mins = x.row(0).to_vec();
        let mut maxs = mins.clone();
        for row in x.row_iter().skip(1) {
            for (j, &v) in row.iter().enumerate() {
                mins[j] = f64::min(mins[j], v);
                maxs[j] = f64::max(maxs[j], v);
            }
        }
        Ok(MinMaxScaler { mins, maxs })
    }

    /// `(x − min)/(max − min)` per column; constant columns map to 0.
    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        crate::error::check_dim(self.mins.len(), x.cols())?;
        let mut out = x.clone();
        for i in 0..out.rows() {
            for (j, v) in out.row_mut(i).iter_mut().enumerate() {
                let range = self.maxs[j] - self.mins[j];
                *v = if range > 0.0 { (*v - self.mins[j]) / range } else { 0.0 };
            }
        }
        Ok(out)
    }
}

/// Scales every column of `ds` to `[0, 1]` and returns the fitted scaler.
pub fn minmax_scale(ds: &Dataset) -> Result<(Dataset, MinMaxScaler)> {
    let scaler = MinMaxScaler::fit(ds.features())?;
    let features = scaler.transform(ds.features())?;
    let mut out = ds.clone();
    out.features = features;
    out.scaled = true;
    Ok((out, scaler))
}

/// SplitMix64 generator.
///
/// ```text
/// state += 0x9E3779B97F4A7C15
/// z = state
/// z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
/// z = (z ^ (z >> 27)) * 0x94D049BB133111EB
/// return z ^ (z >> 31)
/// ```
///
/// with wrapping arithmetic.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Fisher–Yates: for `i` from `len − 1` down to 1, swap `i` with
    /// `next_u64() % (i + 1)`.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = (self.next_u64() % (i as u64 + 1)) as usize;
            items.swap(i, j);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction_of_positives: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(seed: u64) -> Self {
        SplitSpec { train_fraction_of_positives: 0.25, seed }
    }
}

/// Row indices of a one-class split, each list in ascending order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Shuffles the positive indices with [`SplitMix64`] seeded by `spec.seed`;
/// the first `max(1, ⌊fraction · n_pos⌋)` go to training, every other row
/// (remaining positives and all negatives) to testing.
pub fn split_indices(labels: &[Label], spec: &SplitSpec) -> Result<SplitIndices> {
    let frac = spec.train_fraction_of_positives;
    if !(frac > 0.0 && frac < 1.0) {
        return Err(Error::InvalidInput(format!("train fraction must be in (0,1), got {frac}")));
    }
    let mut positives: Vec<usize> = (0..labels.len()).filter(|&i| labels[i].is_positive()).collect();
    if positives.len() < 4 {
        return Err(Error::InvalidInput(format!(
            "need at least 4 positives to split, found {}",
            positives.len()
        )));
    }
    SplitMix64::new(spec.seed).shuffle(&mut positives);
    let n_train = usize::max(1, libm::floor(frac * positives.len() as f64) as usize);
    let mut train = positives[..n_train].to_vec();
    train.sort_unstable();
    let mut in_train = alloc::vec![false; labels.len()];
    for &i in &train {
        in_train[i] = true;
    }
    let test = (0..labels.len()).filter(|&i| !in_train[i]).collect();
    Ok(SplitIndices { train, test })
}

/// Train set of positives only, test set of everything else.
pub fn split_occ(ds: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    let idx = split_indices(ds.labels(), spec)?;
    Ok((ds.subset(&idx.train), ds.subset(&idx.test)))
}
