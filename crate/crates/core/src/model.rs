//! Trained one-class classifier: support vectors, dual coefficients and the
//! offset `β`.
//!
//! The decision value of a point `x` is `Σⱼ αⱼ k(svⱼ, x) − β`; points with a
//! nonnegative value are inliers.

use alloc::format;
use alloc::vec::Vec;

use crate::data::Label;
use crate::error::{check_dim, Error, Result};
use crate::kernel::{GramMatrix, KernelSpec};
use crate::linalg::Matrix;
use crate::solver::{self, SolverConfig, SolverReport};

/// Dual coefficients at or below this value are dropped from the model.
pub const SV_THRESHOLD: f64 = 1e-8;

/// Relative distance to `C` below which a coefficient counts as at the
/// upper bound.
pub const BOUND_RELATIVE_TOL: f64 = 1e-8;

/// Solver outcome recorded with a model.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingMeta {
    pub n_train: usize,
    pub outer_iters: usize,
    pub inner_iters_total: usize,
    pub converged: bool,
    pub objective: f64,
    pub equality_residual: f64,
    pub optimality: f64,
    /// Sum of all dual variables, including the dropped ones.
    pub dual_mass: f64,
    /// Box bound `C`.
    pub upper_bound: f64,
    pub config: SolverConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OccSvmModel {
    kernel: KernelSpec,
    support_vectors: Matrix,
    coefficients: Vec<f64>,
    offset: f64,
    nu: f64,
    meta: TrainingMeta,
}

/// Builds the Gram matrix of `x`, solves the dual and extracts the model.
pub fn train(x: &Matrix, kernel: KernelSpec, config: &SolverConfig) -> Result<OccSvmModel> {
    let kernel = kernel.validated()?;
    config.validate()?;
    let k = kernel.gram(x)?;
    let report = solver::solve(&k, config)?;
    OccSvmModel::from_solution(x, kernel, &k, &report, config)
}

/// Interior indices: `τ_sv < αᵢ < C − τ_bound`.
pub fn interior_indices(alpha: &[f64], upper: f64) -> Vec<usize> {
    let top = upper - BOUND_RELATIVE_TOL * upper;
    (0..alpha.len()).filter(|&i| alpha[i] > SV_THRESHOLD && alpha[i] < top).collect()
}

/// Offset `β`: the mean of `(Kα)ᵢ` over interior coefficients, or over all
/// retained coefficients if none is interior.
pub fn compute_offset(alpha: &[f64], k: &GramMatrix, upper: f64) -> Result<f64> {
    check_dim(k.n(), alpha.len())?;
    let mut idx = interior_indices(alpha, upper);
    if idx.is_empty() {
        idx = (0..alpha.len()).filter(|&i| alpha[i] > SV_THRESHOLD).collect();
    }
    if idx.is_empty() {
        return Err(Error::DegenerateModel("all dual coefficients are below the support threshold".into()));
    }
    let sum: f64 = idx
        .iter()
        .map(|&i| k.row(i).iter().zip(alpha).map(|(kv, a)| kv * a).sum::<f64>())
        .sum();
    Ok(sum / idx.len() as f64)
}

impl OccSvmModel {
    /// Extracts support vectors and the offset from a solved dual.
    pub fn from_solution(
        x: &Matrix,
        kernel: KernelSpec,
        k: &GramMatrix,
        report: &SolverReport,
        config: &SolverConfig,
    ) -> Result<Self> {
        check_dim(x.rows(), report.alpha.len())?;
        check_dim(k.n(), report.alpha.len())?;
        let alpha = &report.alpha;
        let offset = compute_offset(alpha, k, report.upper_bound)?;
        if !offset.is_finite() {
            return Err(Error::DegenerateModel("offset is not finite".into()));
        }
        let kept: Vec<usize> = (0..alpha.len()).filter(|&i| alpha[i] > SV_THRESHOLD).collect();
        let meta = TrainingMeta {
            n_train: x.rows(),
            outer_iters: report.outer_iters,
            inner_iters_total: report.inner_iters_total,
            converged: report.converged,
            objective: report.objective,
            equality_residual: report.equality_residual,
            optimality: report.optimality,
            dual_mass: alpha.iter().sum(),
            upper_bound: report.upper_bound,
            config: *config,
        };
        Ok(OccSvmModel {
            kernel,
            support_vectors: x.select_rows(&kept),
            coefficients: kept.iter().map(|&i| alpha[i]).collect(),
            offset,
            nu: config.nu,
            meta,
        })
    }

    /// Reassembles a model, e.g. from a stored document.
    pub fn from_parts(
        kernel: KernelSpec,
        support_vectors: Matrix,
        coefficients: Vec<f64>,
        offset: f64,
        nu: f64,
        meta: TrainingMeta,
    ) -> Result<Self> {
        let kernel = kernel.validated()?;
        if support_vectors.rows() == 0 {
            return Err(Error::DegenerateModel("model has no support vectors".into()));
        }
        check_dim(support_vectors.rows(), coefficients.len())?;
        if !support_vectors.all_finite() {
            return Err(Error::InvalidInput("support vectors must be finite".into()));
        }
        if let Some(bad) = coefficients.iter().find(|&&a| !(a > 0.0 && a.is_finite())) {
            return Err(Error::InvalidInput(format!("coefficient {bad} is not positive and finite")));
        }
        if !offset.is_finite() {
            return Err(Error::InvalidInput("offset must be finite".into()));
        }
        if !(nu > 0.0 && nu < 1.0) {
            return Err(Error::InvalidInput("nu must be in (0,1)".into()));
        }
        Ok(OccSvmModel { kernel, support_vectors, coefficients, offset, nu, meta })
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn support_vectors(&self) -> &Matrix {
        &self.support_vectors
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn meta(&self) -> &TrainingMeta {
        &self.meta
    }

    pub fn n_support(&self) -> usize {
        self.coefficients.len()
    }

    pub fn dim(&self) -> usize {
        self.support_vectors.cols()
    }

    /// `Σⱼ αⱼ k(svⱼ, x) − β`.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        let s: f64 = self
            .support_vectors
            .row_iter()
            .zip(&self.coefficients)
            .map(|(sv, a)| a * self.kernel.eval_unchecked(sv, x))
            .sum();
        Ok(s - self.offset)
    }

    /// `+1` when `score(x) ≥ 0`, otherwise `−1`.
    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        Ok(Label::from_score(self.score(x)?))
    }

    pub fn score_rows(&self, x: &Matrix) -> Result<Vec<f64>> {
        x.row_iter().map(|r| self.score(r)).collect()
    }

    pub fn predict_rows(&self, x: &Matrix) -> Result<Vec<Label>> {
        x.row_iter().map(|r| self.predict(r)).collect()
    }
}
