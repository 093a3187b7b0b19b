//! File formats, benchmark harness and command-line frontend for the
//! `occsvm-core` one-class SVM trainer.
//!
//! * [`io`] — svmlight and CSV datasets, dense Gram-matrix files.
//! * [`model_file`] — the versioned JSON model document.
//! * [`bench`] — the one-class evaluation protocol over a γ grid.
//! * [`cli`] — the `occsvm` binary's subcommands and exit codes.

pub mod bench;
pub mod cli;
mod error;
pub mod io;
pub mod model_file;
pub mod train;

pub use error::{OccError, Result};
pub use model_file::{load_model, save_model, ModelFile};
pub use occsvm_core as core;
