//! Augmented Lagrangian / fast projected gradient (AL-FPGM) solver for the
//! one-class SVM dual.
//!
//! The equality constraint `h(α) = Σαᵢ − 1 = 0` is moved into the objective
//!
//! ```text
//! L_c(α, μ) = ½αᵀKα + μ·h(α) + ½c·h(α)²
//! ```
//!
//! and the remaining box-constrained problems are solved approximately by an
//! accelerated projected gradient method. After each inner solve the
//! multiplier is updated with `μ ← μ + c·h(α)` and the penalty grows by a
//! constant factor.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::time::Duration;

use crate::error::{check_dim, Error, Result};
use crate::kernel::GramMatrix;
use crate::linalg::{dot, norm_inf};

/// Hyperparameters of the outer augmented Lagrangian loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Box bound is `C = 1/(ν·n)`.
    pub nu: f64,
    /// Initial penalty scaling `c`.
    pub c0: f64,
    /// Inner tolerance factor: each inner solve runs until its residual is
    /// below `theta · rec`.
    pub theta: f64,
    /// Penalty growth factor per outer iteration.
    pub delta: f64,
    /// Outer stopping threshold on the optimality measure.
    pub tol_final: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    /// Cap on the penalty `c`.
    pub c_max: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            nu: 0.5,
            c0: 0.1,
            theta: 0.99,
            delta: 1.01,
            tol_final: 1e-6,
            max_outer: 2000,
            max_inner: 50_000,
            c_max: 1e6,
        }
    }
}

impl SolverConfig {
    pub fn with_nu(self, nu: f64) -> Self {
        SolverConfig { nu, ..self }
    }

    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidInput(msg.into()));
        if !(self.nu > 0.0 && self.nu < 1.0) {
            return bad("nu must be in (0,1)");
        }
        if !(self.c0 > 0.0 && self.c0.is_finite()) {
            return bad("c0 must be positive");
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return bad("theta must be in (0,1)");
        }
        if !(self.delta > 1.0 && self.delta.is_finite()) {
            return bad("delta must be > 1");
        }
        if !(self.tol_final > 0.0 && self.tol_final.is_finite()) {
            return bad("tol must be positive");
        }
        if self.max_outer == 0 || self.max_inner == 0 {
            return bad("iteration caps must be positive");
        }
        // Negated so that a NaN c_max is rejected too.
        if !(self.c_max >= self.c0) {
            return bad("c_max must be at least c0");
        }
        Ok(())
    }

    /// `C = 1/(ν·n)`.
    pub fn upper_bound(&self, n: usize) -> f64 {
        1.0 / (self.nu * n as f64)
    }
}

/// Evolving state of the outer loop.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub alpha: Vec<f64>,
    pub mu: f64,
    pub c: f64,
    /// Current optimality measure.
    pub rec: f64,
    pub outer_iters: usize,
    pub inner_iters_total: usize,
    /// Whether the most recent inner solve met its tolerance.
    pub last_inner_converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverReport {
    pub alpha: Vec<f64>,
    pub mu: f64,
    /// `½αᵀKα`.
    pub objective: f64,
    /// `h(α) = Σαᵢ − 1`.
    pub equality_residual: f64,
    pub optimality: f64,
    pub outer_iters: usize,
    pub inner_iters_total: usize,
    pub converged: bool,
    /// Box bound the problem was solved with.
    pub upper_bound: f64,
    /// Penalty at exit.
    pub c_final: f64,
    /// Left at zero by the core solver; the `occsvm` crate fills it in.
    pub wall_time: Duration,
}

/// Clips every component to `[0, upper]` in place.
#[inline]
pub fn project_box(alpha: &mut [f64], upper: f64) {
    for a in alpha.iter_mut() {
        // max/min rather than clamp: NaN is left in place for the caller to detect
        *a = f64::min(f64::max(*a, 0.0), upper);
    }
}

/// `h(α) = Σαᵢ − 1`.
#[inline]
pub fn equality_residual(alpha: &[f64]) -> f64 {
    alpha.iter().sum::<f64>() - 1.0
}

/// `L_c(α, μ) = ½αᵀKα + μh(α) + ½c·h(α)²`.
pub fn al_value(k: &GramMatrix, alpha: &[f64], mu: f64, c: f64) -> Result<f64> {
    check_dim(k.n(), alpha.len())?;
    let ka = k.mul_vec(alpha)?;
    Ok(al_value_from_product(&ka, alpha, mu, c))
}

#[inline]
fn al_value_from_product(ka: &[f64], alpha: &[f64], mu: f64, c: f64) -> f64 {
    let h = equality_residual(alpha);
    0.5 * dot(alpha, ka) + mu * h + 0.5 * c * h * h
}

/// `∇_α L_c = Kα + (μ + c·h(α))·e`.
pub fn al_gradient(k: &GramMatrix, alpha: &[f64], mu: f64, c: f64) -> Result<Vec<f64>> {
    check_dim(k.n(), alpha.len())?;
    let mut g = k.mul_vec(alpha)?;
    let shift = mu + c * equality_residual(alpha);
    g.iter_mut().for_each(|x| *x += shift);
    Ok(g)
}

/// `‖α − P_box(α − g)‖∞`: zero exactly when `α` is first-order optimal for
/// minimizing a function with gradient `g` over the box.
pub fn projected_gradient_residual(alpha: &[f64], grad: &[f64], upper: f64) -> f64 {
    alpha.iter().zip(grad).fold(0.0, |m, (&a, &g)| {
        let p = f64::min(f64::max(a - g, 0.0), upper);
        f64::max(m, (a - p).abs())
    })
}

/// `max(‖α − P_box(α − ∇L_c(α, μ))‖∞, |h(α)|)`.
///
/// Vanishes exactly at KKT points of the equality and box constrained
/// problem.
pub fn optimality_measure(k: &GramMatrix, alpha: &[f64], mu: f64, c: f64, upper: f64) -> Result<f64> {
    let g = al_gradient(k, alpha, mu, c)?;
    Ok(f64::max(
        projected_gradient_residual(alpha, &g, upper),
        equality_residual(alpha).abs(),
    ))
}

/// The inner solve gives up on the target once its projected gradient
/// residual is below this fraction of the tolerance.
pub const SUBPROBLEM_SOLVED_FACTOR: f64 = 0.1;

/// Inner steps between full recomputations of `K·α̂`; in between the
/// product is updated incrementally.
pub const PRODUCT_REFRESH_INTERVAL: usize = 64;

/// Result of one inner FPGM solve.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerSolution {
    /// Stopping iterate, or the lowest-`L_c` iterate on exhaustion; always
    /// inside the box.
    pub alpha: Vec<f64>,
    /// `L_c(alpha, μ)`.
    pub value: f64,
    pub iterations: usize,
    /// Whether the optimality measure reached the tolerance.
    pub converged: bool,
}

/// Problem data of one inner solve: minimize `L_c(·, μ)` over `[0, upper]ⁿ`.
#[derive(Debug, Clone, Copy)]
pub struct InnerProblem<'a> {
    pub k: &'a GramMatrix,
    pub mu: f64,
    pub c: f64,
    pub upper: f64,
}

impl InnerProblem<'_> {
    /// Step size constant for this problem.
    pub fn lipschitz(&self) -> f64 {
        self.k.lipschitz_estimate(self.c)
    }

    /// Fast projected gradient method, see [`fpgm`].
    pub fn fpgm(&self, alpha0: &[f64], tol: f64, max_inner: usize) -> Result<InnerSolution> {
        self.fpgm_observed(alpha0, tol, max_inner, |_, _| {})
    }

    /// [`InnerProblem::fpgm`] with a callback receiving `(s, α̂_s)` after
    /// every projected step `s = 1, 2, …`.
    pub fn fpgm_observed(
        &self,
        alpha0: &[f64],
        tol: f64,
        max_inner: usize,
        mut observe: impl FnMut(usize, &[f64]),
    ) -> Result<InnerSolution> {
        let k = self.k;
        let n = k.n();
        check_dim(n, alpha0.len())?;
        let (mu, c, upper) = (self.mu, self.c, self.upper);
        let lipschitz = self.lipschitz();
        if !lipschitz.is_finite() || lipschitz <= 0.0 {
            return Err(Error::NumericalFailure { outer_iteration: 0, what: "lipschitz estimate" });
        }
        let step = 1.0 / lipschitz;

        // K·y for the extrapolated point is a linear combination of the last
        // two K·α̂ products, so each iteration needs one matrix-vector product.
        let mut prev = alpha0.to_vec();
        let mut k_prev = vec![0.0; n];
        k.mul_vec_into(&prev, &mut k_prev);
        let mut y = prev.clone();
        let mut k_y = k_prev.clone();
        let mut hat = vec![0.0; n];
        let mut k_hat = vec![0.0; n];
        let mut grad = vec![0.0; n];
        let mut delta = vec![0.0; n];

        let gradient_into = |grad: &mut [f64], ka: &[f64], a: &[f64]| {
            let shift = mu + c * equality_residual(a);
            for (g, &kv) in grad.iter_mut().zip(ka) {
                *g = kv + shift;
            }
        };

        let measure = |a: &[f64], g: &[f64]| {
            f64::max(projected_gradient_residual(a, g, upper), equality_residual(a).abs())
        };

        let mut best = prev.clone();
        let mut best_value = al_value_from_product(&k_prev, &prev, mu, c);
        if !best_value.is_finite() {
            return Err(Error::NumericalFailure { outer_iteration: 0, what: "objective" });
        }
        gradient_into(&mut grad, &k_prev, &prev);
        if measure(&prev, &grad) <= tol {
            return Ok(InnerSolution { alpha: best, value: best_value, iterations: 0, converged: true });
        }

        let mut t = 1.0_f64;
        let mut iterations = 0;
        for s in 1..=max_inner {
            iterations = s;
            gradient_into(&mut grad, &k_y, &y);
            for i in 0..n {
                hat[i] = y[i] - step * grad[i];
            }
            project_box(&mut hat, upper);
            // Coordinates pinned at a bound do not move between steps, so
            // K·α̂ is updated from K·α̂_prev with the change only.
            let mut moved = 0;
            for i in 0..n {
                delta[i] = hat[i] - prev[i];
                moved += (delta[i] != 0.0) as usize;
            }
            if s % PRODUCT_REFRESH_INTERVAL == 0 || 4 * moved >= n {
                k.mul_vec_into(&hat, &mut k_hat);
            } else {
                k_hat.copy_from_slice(&k_prev);
                k.add_mul_sparse(&delta, &mut k_hat);
            }

            let value = al_value_from_product(&k_hat, &hat, mu, c);
            if !value.is_finite() {
                return Err(Error::NumericalFailure { outer_iteration: 0, what: "objective" });
            }
            if value < best_value {
                best_value = value;
                best.copy_from_slice(&hat);
            }
            observe(s, &hat);

            gradient_into(&mut grad, &k_hat, &hat);
            if !grad.iter().all(|g| g.is_finite()) {
                return Err(Error::NumericalFailure { outer_iteration: 0, what: "gradient" });
            }
            let pg = projected_gradient_residual(&hat, &grad, upper);
            if f64::max(pg, equality_residual(&hat).abs()) <= tol {
                return Ok(InnerSolution { alpha: hat, value, iterations, converged: true });
            }
            if pg <= SUBPROBLEM_SOLVED_FACTOR * tol {
                // box subproblem solved; only a multiplier update can reduce |h|
                return Ok(InnerSolution { alpha: hat, value, iterations, converged: false });
            }

            let t_next = 0.5 * (1.0 + libm::sqrt(1.0 + 4.0 * t * t));
            let momentum = (t - 1.0) / t_next;
            for i in 0..n {
                y[i] = hat[i] + momentum * (hat[i] - prev[i]);
                k_y[i] = k_hat[i] + momentum * (k_hat[i] - k_prev[i]);
            }
            core::mem::swap(&mut prev, &mut hat);
            core::mem::swap(&mut k_prev, &mut k_hat);
            t = t_next;
        }
        Ok(InnerSolution { alpha: best, value: best_value, iterations, converged: false })
    }
}

/// Shifts coordinates of `alpha` (inside `[0, upper]`) so that `Σα = 1` up
/// to rounding, changing each coordinate by at most `|h(α)|`.
///
/// The shift `−h/|F|` is applied to the set `F` of coordinates strictly
/// inside the box, or, if there are none, to those with room to move in the
/// needed direction; clipping at a bound moves the remainder to the next
/// round.
pub fn restore_equality(alpha: &mut [f64], upper: f64) {
    for _ in 0..alpha.len() + 1 {
        let h = equality_residual(alpha);
        if h == 0.0 {
            return;
        }
        let room = |a: f64| if h < 0.0 { a < upper } else { a > 0.0 };
        let mut free: Vec<usize> = (0..alpha.len()).filter(|&i| alpha[i] > 0.0 && alpha[i] < upper).collect();
        if free.is_empty() {
            free = (0..alpha.len()).filter(|&i| room(alpha[i])).collect();
        }
        if free.is_empty() {
            return;
        }
        let shift = -h / free.len() as f64;
        let mut moved = false;
        for &i in &free {
            let next = (alpha[i] + shift).clamp(0.0, upper);
            moved |= next != alpha[i];
            alpha[i] = next;
        }
        if !moved {
            return;
        }
    }
}

/// Approximately minimizes `L_c(·, μ)` over `[0, upper]ⁿ` starting from
/// `alpha0` (which must lie in the box).
///
/// Iterates
///
/// ```text
/// α̂ = P_box(y − ∇L_c(y)/L)
/// t' = (1 + √(1 + 4t²)) / 2
/// y  = α̂ + (t − 1)/t' · (α̂ − α̂_prev)
/// ```
///
/// with `L = trace(K) + c·n`. Stops and returns `α̂` once
/// `max(‖α̂ − P_box(α̂ − ∇L_c)‖∞, |h(α̂)|) ≤ tol` (converged), or once the
/// projected gradient residual alone drops below `0.1·tol`: the box problem
/// is then solved and only a multiplier update can reduce `|h|`. When
/// `max_inner` steps run out, the lowest-valued iterate is returned, since
/// accelerated iterates are not monotone.
pub fn fpgm(
    k: &GramMatrix,
    alpha0: &[f64],
    mu: f64,
    c: f64,
    upper: f64,
    tol: f64,
    max_inner: usize,
) -> Result<InnerSolution> {
    InnerProblem { k, mu, c, upper }.fpgm(alpha0, tol, max_inner)
}

/// Outer augmented Lagrangian loop, advanced one multiplier update at a time.
#[derive(Debug, Clone)]
pub struct AugmentedLagrangian<'a> {
    k: &'a GramMatrix,
    config: SolverConfig,
    upper: f64,
    state: SolverState,
}

impl<'a> AugmentedLagrangian<'a> {
    /// Starts at `α = 0, μ = 0, c = c0` with `C = 1/(ν·n)`.
    pub fn new(k: &'a GramMatrix, config: SolverConfig) -> Result<Self> {
        config.validate()?;
        Self::with_upper_bound(k, config, config.upper_bound(k.n()))
    }

    /// Like [`AugmentedLagrangian::new`] with an explicit box bound instead
    /// of one derived from `ν`. The bound must satisfy `n·C ≥ 1`.
    pub fn with_upper_bound(k: &'a GramMatrix, config: SolverConfig, upper: f64) -> Result<Self> {
        let mut cfg_check = config;
        // ν is unused with an explicit bound
        cfg_check.nu = 0.5;
        cfg_check.validate()?;
        let n = k.n();
        if !(upper > 0.0 && upper.is_finite()) {
            return Err(Error::InvalidInput(format!("box bound must be positive, got {upper}")));
        }
        if (n as f64) * upper < 1.0 {
            return Err(Error::InvalidInput(format!(
                "infeasible problem: n·C = {} < 1",
                n as f64 * upper
            )));
        }
        let alpha = vec![0.0; n];
        let rec = optimality_measure(k, &alpha, 0.0, config.c0, upper)?;
        let state = SolverState {
            alpha,
            mu: 0.0,
            c: config.c0,
            rec,
            outer_iters: 0,
            inner_iters_total: 0,
            last_inner_converged: false,
        };
        Ok(AugmentedLagrangian { k, config, upper, state })
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn upper_bound(&self) -> f64 {
        self.upper
    }

    pub fn is_converged(&self) -> bool {
        self.state.rec <= self.config.tol_final
    }

    /// One outer iteration: inner solve to `θ·rec`, multiplier update,
    /// new optimality measure, penalty growth.
    pub fn step(&mut self) -> Result<()> {
        let outer = self.state.outer_iters + 1;
        let tag = |e: Error| match e {
            Error::NumericalFailure { what, .. } => Error::NumericalFailure { outer_iteration: outer, what },
            other => other,
        };
        let st = &mut self.state;
        let problem = InnerProblem { k: self.k, mu: st.mu, c: st.c, upper: self.upper };
        let inner = problem
            .fpgm(&st.alpha, self.config.theta * st.rec, self.config.max_inner)
            .map_err(tag)?;
        st.alpha = inner.alpha;
        st.inner_iters_total += inner.iterations;
        st.last_inner_converged = inner.converged;

        let h = equality_residual(&st.alpha);
        st.mu += st.c * h;
        st.rec = optimality_measure(self.k, &st.alpha, st.mu, st.c, self.upper).map_err(tag)?;
        if !(st.mu.is_finite() && st.rec.is_finite()) {
            return Err(Error::NumericalFailure { outer_iteration: outer, what: "multiplier" });
        }
        st.c = f64::min(self.config.delta * st.c, self.config.c_max);
        st.outer_iters = outer;
        Ok(())
    }

    /// Steps until `rec ≤ tol_final` or `max_outer` iterations.
    pub fn run(mut self) -> Result<SolverReport> {
        if self.k.n() == 1 {
            return Ok(self.single_point_report());
        }
        while !self.is_converged() && self.state.outer_iters < self.config.max_outer {
            self.step()?;
        }
        if self.is_converged() {
            self.polish();
        }
        Ok(self.report())
    }

    /// Removes the residual `h(α)` left at convergence by spreading `−h`
    /// over the free coordinates, then re-estimates `μ` as the multiplier
    /// that zeroes the mean gradient on those coordinates. At a KKT point
    /// every free coordinate has the same gradient, so this cancels the
    /// `μ·h` error in the objective to first order. The polished pair is
    /// kept only if it still meets the stopping threshold.
    fn polish(&mut self) {
        let st = &mut self.state;
        let mut alpha = st.alpha.clone();
        restore_equality(&mut alpha, self.upper);
        let free: Vec<usize> = (0..alpha.len()).filter(|&i| alpha[i] > 0.0 && alpha[i] < self.upper).collect();
        let mu = if free.is_empty() {
            st.mu
        } else {
            let ka = self.k.mul_vec(&alpha).expect("dimensions checked at construction");
            -free.iter().map(|&i| ka[i]).sum::<f64>() / free.len() as f64
        };
        match optimality_measure(self.k, &alpha, mu, st.c, self.upper) {
            Ok(rec) if rec <= self.config.tol_final => {
                st.alpha = alpha;
                st.mu = mu;
                st.rec = rec;
            }
            _ => {}
        }
    }

    fn single_point_report(self) -> SolverReport {
        // Σα = 1 forces α = (1); μ = −K₁₁ makes it a KKT point.
        let mu = -self.k.get(0, 0);
        let alpha = vec![1.0];
        let optimality = optimality_measure(self.k, &alpha, mu, self.state.c, self.upper).unwrap_or(0.0);
        SolverReport {
            objective: 0.5 * self.k.get(0, 0),
            equality_residual: 0.0,
            optimality,
            alpha,
            mu,
            outer_iters: 0,
            inner_iters_total: 0,
            converged: true,
            upper_bound: self.upper,
            c_final: self.state.c,
            wall_time: Duration::ZERO,
        }
    }

    fn report(self) -> SolverReport {
        let st = self.state;
        let ka = self.k.mul_vec(&st.alpha).expect("dimensions checked at construction");
        SolverReport {
            objective: 0.5 * dot(&st.alpha, &ka),
            equality_residual: equality_residual(&st.alpha),
            optimality: st.rec,
            converged: st.rec <= self.config.tol_final,
            alpha: st.alpha,
            mu: st.mu,
            outer_iters: st.outer_iters,
            inner_iters_total: st.inner_iters_total,
            upper_bound: self.upper,
            c_final: st.c,
            wall_time: Duration::ZERO,
        }
    }
}

/// Solves the one-class dual with `C = 1/(ν·n)`.
pub fn solve(k: &GramMatrix, config: &SolverConfig) -> Result<SolverReport> {
    AugmentedLagrangian::new(k, *config)?.run()
}

/// Solves the one-class dual with an explicit box bound `C`.
pub fn solve_with_upper_bound(k: &GramMatrix, config: &SolverConfig, upper: f64) -> Result<SolverReport> {
    AugmentedLagrangian::with_upper_bound(k, *config, upper)?.run()
}

/// `‖∇L_c(α, μ)‖∞`, handy in diagnostics.
pub fn gradient_norm(k: &GramMatrix, alpha: &[f64], mu: f64, c: f64) -> Result<f64> {
    Ok(norm_inf(&al_gradient(k, alpha, mu, c)?))
}
