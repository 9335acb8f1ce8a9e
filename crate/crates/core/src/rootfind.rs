//! Basis-pursuit denoise by root finding on the Pareto curve.
//!
//! `φ(τ) = ‖r(τ)‖₂`, the residual norm of the Lasso solution at radius `τ`,
//! is convex and nonincreasing with `φ′(τ) = −λ/φ(τ)`. Newton on
//! `φ(τ) = σ` gives `τ₊ = τ + (φ − σ)·φ/λ`.

use crate::ball::project;
use crate::error::{LassoError, Result};
use crate::linalg::{norm2, weighted_dual_norm};
use crate::model::{LassoProblem, SolverOptions};
use crate::scalar::Scalar;
use crate::solver::{hybrid_solve, spg_solve, SolverReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubSolver {
    Spg,
    Hybrid,
}

impl SubSolver {
    pub fn solve<T: Scalar>(
        &self,
        problem: &LassoProblem<T>,
        x0: &[T],
        options: &SolverOptions<T>,
    ) -> Result<SolverReport<T>> {
        match self {
            SubSolver::Spg => spg_solve(problem, x0, options),
            SubSolver::Hybrid => hybrid_solve(problem, x0, options),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            SubSolver::Spg => "spg",
            SubSolver::Hybrid => "hybrid",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RootOptions<T> {
    pub sigma: T,
    /// Target for `|σ − ‖r‖| / max(σ, 1e-3)`.
    pub root_tol: T,
    pub max_subproblems: usize,
    pub solver: SubSolver,
    pub inner: SolverOptions<T>,
}

impl<T: Scalar> RootOptions<T> {
    pub fn new(sigma: T) -> Self {
        Self {
            sigma,
            root_tol: T::c(1e-5),
            max_subproblems: 100,
            solver: SubSolver::Hybrid,
            inner: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ParetoState<T> {
    pub tau_k: T,
    pub sigma: T,
    pub misfit: T,
    /// Best dual multiplier of the last subproblem.
    pub lambda_best: T,
    pub warm_start: Vec<T>,
}

impl<T: Scalar> ParetoState<T> {
    /// Estimate of `φ′(τ_k)`.
    pub fn slope(&self) -> T {
        -self.lambda_best / self.misfit
    }
}

/// Unsafeguarded Newton step `τ + (misfit − σ)·misfit/λ`, clamped at zero.
pub fn newton_tau_update<T: Scalar>(state: &ParetoState<T>) -> Result<T> {
    if state.misfit == state.sigma {
        return Ok(state.tau_k);
    }
    if !(state.lambda_best > T::c(1e-14)) {
        return Err(LassoError::Stalled);
    }
    let next = state.tau_k + (state.misfit - state.sigma) * state.misfit / state.lambda_best;
    Ok(next.max(T::zero()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RootStatus {
    Root,
    BudgetExhausted,
    SubproblemFailure,
}

impl RootStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RootStatus::Root => "root",
            RootStatus::BudgetExhausted => "budget_exhausted",
            RootStatus::SubproblemFailure => "subproblem_failure",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RootReport<T> {
    pub tau_root: T,
    pub x_final: Vec<T>,
    pub misfit: T,
    pub relative_misfit: T,
    pub subproblem_count: usize,
    pub total_inner_iterations: usize,
    /// Subproblems that stopped before reaching the gap tolerance.
    pub unconverged_subproblems: usize,
    pub status: RootStatus,
    /// `(τ, misfit)` of every solved subproblem, starting with `τ = 0`.
    pub path: Vec<(T, T)>,
}

fn relative_misfit<T: Scalar>(misfit: T, sigma: T) -> T {
    (sigma - misfit).abs() / sigma.max(T::c(1e-3))
}

/// Solves `min ‖x‖_{w,1}` subject to `‖Ax − b‖₂ ≤ σ` through a sequence of
/// Lasso problems. `problem.tau` is ignored; `μ` and `c` must be zero.
pub fn solve_bpdn<T: Scalar>(problem: &LassoProblem<T>, options: &RootOptions<T>) -> Result<RootReport<T>> {
    if problem.mu != T::zero() || problem.has_linear_term() {
        return Err(LassoError::WrongFormulation("root finding needs mu = 0 and c = 0"));
    }
    let sigma = options.sigma;
    if !(sigma >= T::zero()) {
        return Err(LassoError::InvalidParameter("sigma must be nonnegative".into()));
    }
    let n = problem.n();
    let b_norm = norm2(&problem.b);
    if sigma >= b_norm {
        return Ok(RootReport {
            tau_root: T::zero(),
            x_final: vec![T::zero(); n],
            misfit: b_norm,
            relative_misfit: T::zero(),
            subproblem_count: 0,
            total_inner_iterations: 0,
            unconverged_subproblems: 0,
            status: RootStatus::Root,
            path: vec![(T::zero(), b_norm)],
        });
    }

    // τ = 0 is solved in closed form: x = 0, λ = ‖Aᵀb‖.
    let mut atb = vec![T::zero(); n];
    problem.op.apply_adjoint(&problem.b, &mut atb);
    let mut state = ParetoState {
        tau_k: T::zero(),
        sigma,
        misfit: b_norm,
        lambda_best: weighted_dual_norm(&atb, &problem.w),
        warm_start: vec![T::zero(); n],
    };
    let mut lo = T::zero();
    let mut hi = T::infinity();
    let mut path = vec![(T::zero(), b_norm)];
    let mut count = 0;
    let mut inner = 0;
    let mut unconverged = 0;
    let status = loop {
        if relative_misfit(state.misfit, sigma) <= options.root_tol {
            break RootStatus::Root;
        }
        if count >= options.max_subproblems {
            break RootStatus::BudgetExhausted;
        }
        if state.misfit > sigma && !(state.lambda_best > T::c(1e-14)) {
            return Err(LassoError::Stalled);
        }
        let mut tau = newton_tau_update(&state)?;
        if !(tau > lo && tau < hi) {
            tau = if hi.is_finite() { T::c(0.5) * (lo + hi) } else { lo + lo.max(T::one()) };
        }
        let sub = problem.with_tau(tau)?;
        let x0 = project(&state.warm_start, &problem.w, tau)?.x;
        let rep = options.solver.solve(&sub, &x0, &options.inner)?;
        count += 1;
        inner += rep.iterations;
        if rep.status != crate::solver::Status::Optimal {
            unconverged += 1;
        }
        let misfit = norm2(&sub.residual(&rep.x_final));
        path.push((tau, misfit));
        // The primal misfit bounds φ(τ) from above and the dual objective
        // bounds ½φ(τ)² from below, so only certified sides move the bracket.
        if misfit < sigma {
            hi = hi.min(tau);
        } else if (T::c(2.0) * rep.dual_obj).max(T::zero()).sqrt() > sigma {
            lo = lo.max(tau);
        }
        state = ParetoState { tau_k: tau, sigma, misfit, lambda_best: rep.lambda, warm_start: rep.x_final };
        // a failed subproblem is tolerated only when its gap is still small
        if rep.status == crate::solver::Status::LinesearchFailure
            && relative_misfit(misfit, sigma) > options.root_tol
            && rep.dual_gap_relative > options.inner.opt_tol.sqrt()
        {
            break RootStatus::SubproblemFailure;
        }
    };
    Ok(RootReport {
        tau_root: state.tau_k,
        relative_misfit: relative_misfit(state.misfit, sigma),
        misfit: state.misfit,
        x_final: state.warm_start,
        subproblem_count: count,
        total_inner_iterations: inner,
        unconverged_subproblems: unconverged,
        status,
        path,
    })
}
