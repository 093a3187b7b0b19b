//! Kernel functions, Gram matrices and the trace-based Lipschitz estimate.

use alloc::format;
use core::fmt;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, squared_distance, Matrix};

/// Kernel family with its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    /// `exp(-γ‖x − y‖)`, the Gaussian with an unsquared Euclidean norm.
    PaperGaussian { gamma: f64 },
    /// `exp(-γ‖x − y‖²)`, the conventional RBF kernel.
    RbfSquared { gamma: f64 },
    /// `xᵀy`.
    Linear,
    /// `(xᵀy + coef0)^degree`.
    Polynomial { degree: u32, coef0: f64 },
}

impl KernelSpec {
    pub fn paper_gaussian(gamma: f64) -> Result<Self> {
        KernelSpec::PaperGaussian { gamma }.validated()
    }

    pub fn rbf_squared(gamma: f64) -> Result<Self> {
        KernelSpec::RbfSquared { gamma }.validated()
    }

    pub fn polynomial(degree: u32, coef0: f64) -> Result<Self> {
        KernelSpec::Polynomial { degree, coef0 }.validated()
    }

    /// Returns `self` if its hyperparameters are admissible.
    pub fn validated(self) -> Result<Self> {
        match self {
            KernelSpec::PaperGaussian { gamma } | KernelSpec::RbfSquared { gamma } => {
                if !(gamma > 0.0 && gamma.is_finite()) {
                    return Err(Error::InvalidInput(format!(
                        "gamma must be a positive finite number, got {gamma}"
                    )));
                }
            }
            KernelSpec::Polynomial { degree, coef0 } => {
                if degree < 1 {
                    return Err(Error::InvalidInput("polynomial degree must be >= 1".into()));
                }
                if !coef0.is_finite() {
                    return Err(Error::InvalidInput("coef0 must be finite".into()));
                }
            }
            KernelSpec::Linear => {}
        }
        Ok(self)
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            KernelSpec::PaperGaussian { .. } => "paper-gaussian",
            KernelSpec::RbfSquared { .. } => "rbf-squared",
            KernelSpec::Linear => "linear",
            KernelSpec::Polynomial { .. } => "polynomial",
        }
    }

    pub fn gamma(&self) -> Option<f64> {
        match *self {
            KernelSpec::PaperGaussian { gamma } | KernelSpec::RbfSquared { gamma } => Some(gamma),
            _ => None,
        }
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self, KernelSpec::PaperGaussian { .. } | KernelSpec::RbfSquared { .. })
    }

    /// Same family with a different width. Non-Gaussian kernels are returned unchanged.
    pub fn with_gamma(self, gamma: f64) -> Self {
        match self {
            KernelSpec::PaperGaussian { .. } => KernelSpec::PaperGaussian { gamma },
            KernelSpec::RbfSquared { .. } => KernelSpec::RbfSquared { gamma },
            other => other,
        }
    }

    /// Kernel value without the dimension check.
    #[inline]
    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            KernelSpec::PaperGaussian { gamma } => {
                libm::exp(-gamma * libm::sqrt(squared_distance(x, y)))
            }
            KernelSpec::RbfSquared { gamma } => libm::exp(-gamma * squared_distance(x, y)),
            KernelSpec::Linear => dot(x, y),
            KernelSpec::Polynomial { degree, coef0 } => powu(dot(x, y) + coef0, degree),
        }
    }

    /// `k(x, y)`.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_dim(x.len(), y.len())?;
        Ok(self.eval_unchecked(x, y))
    }

    /// Gram matrix `Kᵢⱼ = k(xᵢ, xⱼ)` over the rows of `x`.
    ///
    /// Only the upper triangle is evaluated; the lower triangle is a copy so
    /// the result is bit-exactly symmetric.
    pub fn gram(&self, x: &Matrix) -> Result<GramMatrix> {
        let n = x.rows();
        if n == 0 {
            return Err(Error::InvalidInput("gram matrix needs at least one point".into()));
        }
        if x.cols() == 0 {
            return Err(Error::InvalidInput("points must have at least one feature".into()));
        }
        let mut k = Matrix::zeros(n, n);
        for i in 0..n {
            let xi = x.row(i);
            for j in i..n {
                let v = self.eval_unchecked(xi, x.row(j));
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        Ok(GramMatrix::from_matrix_unchecked(k))
    }
}

fn powu(base: f64, exp: u32) -> f64 {
    let mut acc = 1.0;
    let mut b = base;
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            acc *= b;
        }
        b *= b;
        e >>= 1;
    }
    acc
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::PaperGaussian { gamma } | KernelSpec::RbfSquared { gamma } => {
                write!(f, "{}(gamma={gamma})", self.family_name())
            }
            KernelSpec::Linear => f.write_str("linear"),
            KernelSpec::Polynomial { degree, coef0 } => {
                write!(f, "polynomial(degree={degree}, coef0={coef0})")
            }
        }
    }
}

/// Dense symmetric kernel matrix with its trace cached.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    entries: Matrix,
    trace: f64,
}

impl GramMatrix {
    /// Wraps an explicit square matrix, e.g. one read from a file.
    ///
    /// The matrix must be square, finite and exactly symmetric. Positive
    /// semidefiniteness is not checked.
    pub fn from_matrix(entries: Matrix) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::InvalidInput(format!(
                "gram matrix must be square, got {}x{}",
                entries.rows(),
                entries.cols()
            )));
        }
        if entries.rows() == 0 {
            return Err(Error::InvalidInput("gram matrix must be non-empty".into()));
        }
        if !entries.all_finite() {
            return Err(Error::InvalidInput("gram matrix has non-finite entries".into()));
        }
        let n = entries.rows();
        for i in 0..n {
            for j in (i + 1)..n {
                if entries[(i, j)] != entries[(j, i)] {
                    return Err(Error::InvalidInput(format!(
                        "gram matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self::from_matrix_unchecked(entries))
    }

    fn from_matrix_unchecked(entries: Matrix) -> Self {
        let trace = (0..entries.rows()).map(|i| entries[(i, i)]).sum();
        GramMatrix { entries, trace }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.entries.rows()
    }

    #[inline]
    pub fn trace(&self) -> f64 {
        self.trace
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn matrix(&self) -> &Matrix {
        &self.entries
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        self.entries.row(i)
    }

    /// `out = K·α`.
    ///
    /// Iterates after a box projection are mostly exact zeros, so when few
    /// entries are nonzero the product is accumulated over the nonzero
    /// columns only (`K` is symmetric, columns are rows).
    pub fn mul_vec_into(&self, alpha: &[f64], out: &mut [f64]) {
        let n = self.n();
        debug_assert_eq!(alpha.len(), n);
        let nnz = alpha.iter().filter(|&&a| a != 0.0).count();
        if 4 * nnz >= n {
            self.entries.mul_vec_into(alpha, out);
        } else {
            out.iter_mut().for_each(|o| *o = 0.0);
            self.add_mul_sparse(alpha, out);
        }
    }

    /// `out += K·v`, skipping the zero entries of `v`.
    pub fn add_mul_sparse(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.n());
        for (j, &a) in v.iter().enumerate() {
            if a != 0.0 {
                for (o, &kv) in out.iter_mut().zip(self.entries.row(j)) {
                    *o += a * kv;
                }
            }
        }
    }

    pub fn mul_vec(&self, alpha: &[f64]) -> Result<alloc::vec::Vec<f64>> {
        check_dim(self.n(), alpha.len())?;
        let mut out = alloc::vec![0.0; self.n()];
        self.mul_vec_into(alpha, &mut out);
        Ok(out)
    }

    /// Step-size constant `trace(K) + trace(c·eeᵀ) = trace(K) + c·n`.
    ///
    /// For positive semidefinite `K` the trace of `K + c·eeᵀ` is the sum of
    /// its eigenvalues and therefore bounds the largest one, which is the
    /// Lipschitz constant of the augmented Lagrangian gradient.
    pub fn lipschitz_estimate(&self, c: f64) -> f64 {
        debug_assert!(c > 0.0);
        self.trace + c * self.n() as f64
    }
}
