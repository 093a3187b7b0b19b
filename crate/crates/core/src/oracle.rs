//! Slow, independent reference implementations used to check the solver.
//!
//! Nothing here shares code with [`crate::solver`]: there is no momentum,
//! no augmented Lagrangian schedule and no trace-based step size. The QP
//! oracle runs plain projected gradient directly on the feasible polytope
//! `{0 ≤ α ≤ C, Σα = 1}` using an exact projection, so its iterates satisfy
//! the equality constraint to rounding error.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::kernel::GramMatrix;
use crate::linalg::{dot, norm_inf, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMethod {
    Grid2d,
    SlowPgm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub alpha: Vec<f64>,
    /// `½ αᵀKα`.
    pub objective: f64,
    /// `‖α − P(α − Kα)‖∞` with `P` the projection onto the feasible polytope.
    pub kkt_residual: f64,
    pub method: OracleMethod,
}

fn quad_form(k: &Matrix, alpha: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..alpha.len() {
        let mut row = 0.0;
        for j in 0..alpha.len() {
            row += k[(i, j)] * alpha[j];
        }
        s += alpha[i] * row;
    }
    0.5 * s
}

/// Exact minimizer for `n = 2` by eliminating `α₂ = 1 − α₁`.
///
/// Scans `α₁` on a 1e-6 grid over its feasible interval, then refines the
/// best cell by bisection on the sign of the derivative down to a width
/// of 1e-12.
pub fn grid2d_oracle(k: &GramMatrix, upper: f64) -> Result<OracleSolution> {
    if k.n() != 2 {
        return Err(Error::InvalidInput(format!("grid2d oracle needs n = 2, got {}", k.n())));
    }
    let lo = f64::max(0.0, 1.0 - upper);
    let hi = f64::min(upper, 1.0);
    if lo > hi {
        return Err(Error::OracleFailure(format!("empty feasible interval [{lo}, {hi}]")));
    }
    let (k11, k12, k22) = (k.get(0, 0), k.get(0, 1), k.get(1, 1));
    let f = |a: f64| {
        let b = 1.0 - a;
        0.5 * (k11 * a * a + 2.0 * k12 * a * b + k22 * b * b)
    };

    let spacing = 1e-6;
    let steps = libm::ceil((hi - lo) / spacing) as usize;
    let at = |i: usize| f64::min(lo + i as f64 * spacing, hi);
    let mut best = 0;
    let mut best_val = f(lo);
    for i in 1..=steps {
        let v = f(at(i));
        if v < best_val {
            best = i;
            best_val = v;
        }
    }
    // Refine inside the bracketing cells by bisection on the sign of the
    // derivative; comparing objective values stalls once differences drop
    // below the rounding level near the minimum.
    let slope = |a: f64| (k11 - 2.0 * k12 + k22) * a + (k12 - k22);
    let mut a = if best == 0 { lo } else { at(best - 1) };
    let mut b = f64::min(at(best + 1), hi);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if slope(m) > 0.0 {
            b = m;
        } else {
            a = m;
        }
    }
    let mut a1 = 0.5 * (a + b);
    // the grid point itself may still be best when the minimum sits on a bound
    for cand in [lo, hi, at(best)] {
        if f(cand) < f(a1) {
            a1 = cand;
        }
    }
    let alpha = vec![a1, 1.0 - a1];
    let objective = f(a1);
    let kkt_residual = polytope_residual(k.matrix(), &alpha, upper);
    Ok(OracleSolution { alpha, objective, kkt_residual, method: OracleMethod::Grid2d })
}

/// Euclidean projection of `v` onto `{0 ≤ α ≤ upper, Σα = 1}`.
///
/// The projection is `clip(v − τ, 0, upper)` for the shift `τ` that makes
/// the entries sum to one; `τ` is found by bisection and then polished on
/// the free set.
pub fn project_polytope(v: &[f64], upper: f64) -> Vec<f64> {
    let clip = |x: f64| x.clamp(0.0, upper);
    let total = |tau: f64| v.iter().map(|&x| clip(x - tau)).sum::<f64>();
    let vmin = v.iter().copied().fold(f64::INFINITY, f64::min);
    let vmax = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // total(lo) = n·upper ≥ 1, total(hi) = 0
    let mut lo = vmin - upper;
    let mut hi = vmax;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if total(mid) >= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut tau = 0.5 * (lo + hi);
    for _ in 0..3 {
        let free = v.iter().filter(|&&x| x - tau > 0.0 && x - tau < upper).count();
        if free == 0 {
            break;
        }
        tau += (total(tau) - 1.0) / free as f64;
    }
    v.iter().map(|&x| clip(x - tau)).collect()
}

fn polytope_residual(k: &Matrix, alpha: &[f64], upper: f64) -> f64 {
    let n = alpha.len();
    let mut trial = vec![0.0; n];
    for i in 0..n {
        let g: f64 = (0..n).map(|j| k[(i, j)] * alpha[j]).sum();
        trial[i] = alpha[i] - g;
    }
    let p = project_polytope(&trial, upper);
    alpha.iter().zip(&p).fold(0.0, |m, (a, b)| f64::max(m, (a - b).abs()))
}

/// Plain (non-accelerated) projected gradient on the feasible polytope.
///
/// Runs `α ← P(α − Kα / λ)` from the uniform point until the projected
/// gradient residual drops to `tol`. `λ` is the largest eigenvalue of `K`
/// from power iteration.
pub fn slow_pgm_oracle(k: &GramMatrix, upper: f64, tol: f64, max_iter: usize) -> Result<OracleSolution> {
    let n = k.n();
    if n as f64 * upper < 1.0 {
        return Err(Error::OracleFailure(format!("infeasible: n·C = {} < 1", n as f64 * upper)));
    }
    let km = k.matrix();
    let lambda = power_iteration_spectral_norm(km, 1e-12, 1_000_000);
    let step = if lambda > 0.0 { 1.0 / (lambda * (1.0 + 1e-9)) } else { 1.0 };
    let mut alpha = project_polytope(&vec![1.0 / n as f64; n], upper);
    let mut grad = vec![0.0; n];
    let mut trial = vec![0.0; n];
    for _ in 0..max_iter {
        for (i, g) in grad.iter_mut().enumerate() {
            *g = dot(km.row(i), &alpha);
        }
        let residual = {
            for i in 0..n {
                trial[i] = alpha[i] - grad[i];
            }
            let p = project_polytope(&trial, upper);
            alpha.iter().zip(&p).fold(0.0, |m, (a, b)| f64::max(m, (a - b).abs()))
        };
        if residual <= tol {
            let objective = quad_form(km, &alpha);
            return Ok(OracleSolution { alpha, objective, kkt_residual: residual, method: OracleMethod::SlowPgm });
        }
        for i in 0..n {
            trial[i] = alpha[i] - step * grad[i];
        }
        alpha = project_polytope(&trial, upper);
    }
    Err(Error::OracleFailure(format!("slow_pgm did not reach {tol} in {max_iter} iterations")))
}

/// Minimizer of `½αᵀKα + μh(α) + ½c·h(α)²` over the box `[0, upper]ⁿ`
/// (no equality constraint), by plain projected gradient.
///
/// Returns the minimizer and the minimum value.
pub fn box_pgm_oracle(
    k: &GramMatrix,
    mu: f64,
    c: f64,
    upper: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, f64)> {
    let n = k.n();
    let km = k.matrix();
    // Hessian K + c·eeᵀ
    let mut hess = km.clone();
    for i in 0..n {
        for j in 0..n {
            hess[(i, j)] += c;
        }
    }
    let lambda = power_iteration_spectral_norm(&hess, 1e-12, 1_000_000);
    let step = 1.0 / (lambda * (1.0 + 1e-9));
    let value = |a: &[f64]| {
        let h = a.iter().sum::<f64>() - 1.0;
        quad_form(km, a) + mu * h + 0.5 * c * h * h
    };
    let mut alpha = vec![0.0; n];
    let mut grad = vec![0.0; n];
    for _ in 0..max_iter {
        let h = alpha.iter().sum::<f64>() - 1.0;
        for (i, g) in grad.iter_mut().enumerate() {
            *g = dot(km.row(i), &alpha) + mu + c * h;
        }
        let residual = alpha
            .iter()
            .zip(&grad)
            .fold(0.0, |m, (a, g)| f64::max(m, (a - (a - g).clamp(0.0, upper)).abs()));
        if residual <= tol {
            let v = value(&alpha);
            return Ok((alpha, v));
        }
        for i in 0..n {
            alpha[i] = (alpha[i] - step * grad[i]).clamp(0.0, upper);
        }
    }
    Err(Error::OracleFailure(format!("box_pgm did not reach {tol} in {max_iter} iterations")))
}

/// Largest eigenvalue magnitude of a symmetric matrix by power iteration,
/// stopping when the Rayleigh quotient changes by less than `rel_tol`
/// relatively.
pub fn power_iteration_spectral_norm(m: &Matrix, rel_tol: f64, max_iter: usize) -> f64 {
    let n = m.rows();
    if n == 0 {
        return 0.0;
    }
    // deterministic, non-symmetric start so it is not orthogonal to the top eigenvector
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + libm::sqrt(i as f64 + 1.0) * 1e-3).collect();
    let norm = libm::sqrt(dot(&v, &v));
    v.iter_mut().for_each(|x| *x /= norm);
    let mut w = vec![0.0; n];
    let mut estimate = 0.0;
    for _ in 0..max_iter {
        m.mul_vec_into(&v, &mut w);
        let rayleigh = dot(&v, &w);
        let wn = libm::sqrt(dot(&w, &w));
        if wn == 0.0 {
            return 0.0;
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / wn;
        }
        let done = (rayleigh - estimate).abs() <= rel_tol * rayleigh.abs();
        estimate = rayleigh;
        if done {
            break;
        }
    }
    estimate.abs()
}

/// `K = AᵀA`: the Gram matrix of the columns of `a`, built symmetrically.
pub fn gram_of_columns(a: &Matrix) -> GramMatrix {
    let n = a.cols();
    let mut k = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut s = 0.0;
            for r in 0..a.rows() {
                s += a[(r, i)] * a[(r, j)];
            }
            k[(i, j)] = s;
            k[(j, i)] = s;
        }
    }
    GramMatrix::from_matrix(k).expect("AᵀA is square, symmetric and finite")
}

/// Central finite-difference gradient of `func` at `point`.
pub fn fd_gradient(mut func: impl FnMut(&[f64]) -> f64, point: &[f64], step: f64) -> Vec<f64> {
    let mut x = point.to_vec();
    (0..point.len())
        .map(|i| {
            let orig = x[i];
            x[i] = orig + step;
            let fp = func(&x);
            x[i] = orig - step;
            let fm = func(&x);
            x[i] = orig;
            (fp - fm) / (2.0 * step)
        })
        .collect()
}

/// `‖a − b‖∞`.
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm_inf(&d)
}
