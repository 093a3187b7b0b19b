//! One-class SVM training with an augmented Lagrangian / fast projected
//! gradient solver.
//!
//! The crate is `no_std` and only needs `alloc`. Everything here is a pure
//! function of its inputs: Gram matrices, the dual QP solver, model scoring,
//! the one-class train/test split and the evaluation metrics. File formats,
//! timing and the command-line frontend live in the `occsvm` crate.
//!
//! The dual problem solved is
//!
//! ```text
//! minimize   ½ αᵀKα
//! subject to Σ αᵢ = 1,   0 ≤ αᵢ ≤ C = 1/(νn)
//! ```
//!
//! where `K` is the kernel Gram matrix of the training points.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod data;
mod error;
pub mod kernel;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod solver;

pub use data::{Dataset, Label, MinMaxScaler, SourceFormat, SplitSpec};
pub use error::{Error, Result};
pub use kernel::{GramMatrix, KernelSpec};
pub use linalg::Matrix;
pub use model::{OccSvmModel, TrainingMeta};
pub use solver::{SolverConfig, SolverReport};
