//! Wall-clock timed wrappers around the core solver.

use std::time::{Duration, Instant};

use occsvm_core::solver;
use occsvm_core::{GramMatrix, KernelSpec, Matrix, OccSvmModel, SolverConfig, SolverReport};

use crate::error::Result;

/// Runs the solver and records its wall-clock time in the report.
pub fn solve_timed(k: &GramMatrix, config: &SolverConfig) -> Result<SolverReport> {
    let start = Instant::now();
    let mut report = solver::solve(k, config)?;
    report.wall_time = start.elapsed();
    Ok(report)
}

/// As [`solve_timed`] with an explicit box bound `C` instead of `1/(νn)`.
pub fn solve_timed_with_upper_bound(k: &GramMatrix, config: &SolverConfig, upper: f64) -> Result<SolverReport> {
    let start = Instant::now();
    let mut report = solver::solve_with_upper_bound(k, config, upper)?;
    report.wall_time = start.elapsed();
    Ok(report)
}

/// A trained model with the timings of its two phases.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: OccSvmModel,
    pub report: SolverReport,
    pub gram_time: Duration,
}

/// Same result as [`occsvm_core::model::train`], with the Gram build and
/// the solve timed separately.
pub fn train_timed(x: &Matrix, kernel: KernelSpec, config: &SolverConfig) -> Result<TrainOutcome> {
    let kernel = kernel.validated()?;
    config.validate()?;
    let start = Instant::now();
    let k = kernel.gram(x)?;
    let gram_time = start.elapsed();
    let report = solve_timed(&k, config)?;
    let model = OccSvmModel::from_solution(x, kernel, &k, &report, config)?;
    Ok(TrainOutcome { model, report, gram_time })
}
