//! Problem data, operators, iterates and solver options.

use std::sync::Arc;

use crate::ball::{face_of, FaceId};
use crate::error::{LassoError, Result};
use crate::linalg::{dot, norm2_sq};
use crate::scalar::Scalar;

/// Matrix-free linear map `A: R^n -> R^m`.
pub trait LinearOperator<T: Scalar>: Send + Sync {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    /// `out = A x`
    fn apply(&self, x: &[T], out: &mut [T]);
    /// `out = A^T y`
    fn apply_adjoint(&self, y: &[T], out: &mut [T]);

    /// Column `i` written densely into `out`.
    fn column(&self, i: usize, out: &mut [T]) {
        let mut e = vec![T::zero(); self.cols()];
        e[i] = T::one();
        self.apply(&e, out);
    }

    /// `out += alpha * a_i`. Dense operators override this to avoid a temporary.
    fn add_column(&self, i: usize, alpha: T, out: &mut [T]) {
        let mut col = vec![T::zero(); self.rows()];
        self.column(i, &mut col);
        for (o, c) in out.iter_mut().zip(&col) {
            *o += alpha * *c;
        }
    }
}

/// Dense column-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    /// Builds from column-major storage.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(LassoError::DimensionMismatch(format!(
                "matrix data has {} entries, expected {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[j * self.rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[j * self.rows + i] = v;
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[T] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [T] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn cast<U: Scalar>(&self) -> DenseMatrix<U> {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| U::c(v.to_f64_lossy())).collect(),
        }
    }
}

impl<T: Scalar> LinearOperator<T> for DenseMatrix<T> {
    fn rows(&self) -> usize {
        self.rows
    }

    fn cols(&self) -> usize {
        self.cols
    }

    fn apply(&self, x: &[T], out: &mut [T]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(out.len(), self.rows);
        out.iter_mut().for_each(|v| *v = T::zero());
        for (j, &xj) in x.iter().enumerate() {
            if xj != T::zero() {
                for (o, a) in out.iter_mut().zip(self.col(j)) {
                    *o += xj * *a;
                }
            }
        }
    }

    fn apply_adjoint(&self, y: &[T], out: &mut [T]) {
        assert_eq!(y.len(), self.rows);
        assert_eq!(out.len(), self.cols);
        for (j, o) in out.iter_mut().enumerate() {
            *o = dot(self.col(j), y);
        }
    }

    fn column(&self, i: usize, out: &mut [T]) {
        out.copy_from_slice(self.col(i));
    }

    fn add_column(&self, i: usize, alpha: T, out: &mut [T]) {
        for (o, a) in out.iter_mut().zip(self.col(i)) {
            *o += alpha * *a;
        }
    }
}

/// `minimize ½‖Ax−b‖² + (μ/2)‖x‖² + cᵀx` subject to `Σ w_i|x_i| ≤ τ`.
#[derive(Clone)]
pub struct LassoProblem<T: Scalar> {
    pub op: Arc<dyn LinearOperator<T>>,
    pub b: Vec<T>,
    pub w: Vec<T>,
    pub tau: T,
    pub mu: T,
    pub c: Vec<T>,
}

impl<T: Scalar> std::fmt::Debug for LassoProblem<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LassoProblem")
            .field("m", &self.m())
            .field("n", &self.n())
            .field("tau", &self.tau)
            .field("mu", &self.mu)
            .finish()
    }
}

impl<T: Scalar> LassoProblem<T> {
    /// Unit weights, no ridge term, no linear term.
    pub fn new(op: Arc<dyn LinearOperator<T>>, b: Vec<T>, tau: T) -> Result<Self> {
        if b.len() != op.rows() {
            return Err(LassoError::DimensionMismatch(format!(
                "b has length {}, operator has {} rows",
                b.len(),
                op.rows()
            )));
        }
        if !(tau >= T::zero()) || !tau.is_finite() {
            return Err(LassoError::InvalidRadius);
        }
        let n = op.cols();
        Ok(Self { op, b, w: vec![T::one(); n], tau, mu: T::zero(), c: vec![T::zero(); n] })
    }

    pub fn from_dense(a: DenseMatrix<T>, b: Vec<T>, tau: T) -> Result<Self> {
        Self::new(Arc::new(a), b, tau)
    }

    pub fn with_weights(mut self, w: Vec<T>) -> Result<Self> {
        check_weights(&w, self.n())?;
        self.w = w;
        Ok(self)
    }

    pub fn with_mu(mut self, mu: T) -> Result<Self> {
        if !(mu >= T::zero()) || !mu.is_finite() {
            return Err(LassoError::InvalidMu);
        }
        self.mu = mu;
        Ok(self)
    }

    pub fn with_linear_term(mut self, c: Vec<T>) -> Result<Self> {
        if c.len() != self.n() {
            return Err(LassoError::DimensionMismatch(format!(
                "c has length {}, operator has {} columns",
                c.len(),
                self.n()
            )));
        }
        self.c = c;
        Ok(self)
    }

    /// Same data on a different radius.
    pub fn with_tau(&self, tau: T) -> Result<Self> {
        if !(tau >= T::zero()) || !tau.is_finite() {
            return Err(LassoError::InvalidRadius);
        }
        let mut p = self.clone();
        p.tau = tau;
        Ok(p)
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.op.rows()
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.op.cols()
    }

    pub fn has_linear_term(&self) -> bool {
        self.c.iter().any(|v| *v != T::zero())
    }

    pub(crate) fn check_x(&self, x: &[T]) -> Result<()> {
        if x.len() != self.n() {
            return Err(LassoError::DimensionMismatch(format!(
                "x has length {}, problem has n = {}",
                x.len(),
                self.n()
            )));
        }
        Ok(())
    }

    /// `r = Ax − b`
    pub fn residual(&self, x: &[T]) -> Vec<T> {
        let mut r = vec![T::zero(); self.m()];
        self.op.apply(x, &mut r);
        for (ri, bi) in r.iter_mut().zip(&self.b) {
            *ri -= *bi;
        }
        r
    }

    /// `g = Aᵀr + μx + c` for a given residual.
    pub fn gradient_from_residual(&self, x: &[T], r: &[T]) -> Vec<T> {
        let mut g = vec![T::zero(); self.n()];
        self.op.apply_adjoint(r, &mut g);
        for i in 0..g.len() {
            g[i] += self.mu * x[i] + self.c[i];
        }
        g
    }

    pub fn objective_from_residual(&self, x: &[T], r: &[T]) -> T {
        let half = T::c(0.5);
        let mut f = half * norm2_sq(r) + dot(&self.c, x);
        if self.mu != T::zero() {
            f += half * self.mu * norm2_sq(x);
        }
        f
    }

    /// Objective at an arbitrary (possibly infeasible) point.
    pub fn objective(&self, x: &[T]) -> Result<T> {
        self.check_x(x)?;
        let r = self.residual(x);
        Ok(self.objective_from_residual(x, &r))
    }

    /// Gradient at an arbitrary (possibly infeasible) point.
    pub fn gradient(&self, x: &[T]) -> Result<Vec<T>> {
        self.check_x(x)?;
        let r = self.residual(x);
        Ok(self.gradient_from_residual(x, &r))
    }
}

pub(crate) fn check_weights<T: Scalar>(w: &[T], n: usize) -> Result<()> {
    if w.len() != n {
        return Err(LassoError::DimensionMismatch(format!(
            "w has length {}, expected {}",
            w.len(),
            n
        )));
    }
    for (index, wi) in w.iter().enumerate() {
        if !(*wi > T::zero()) || !wi.is_finite() {
            return Err(LassoError::NonPositiveWeight { index });
        }
    }
    Ok(())
}

/// Point together with cached residual, gradient, objective and face.
#[derive(Debug, Clone, PartialEq)]
pub struct Iterate<T: Scalar> {
    pub x: Vec<T>,
    pub r: Vec<T>,
    pub g: Vec<T>,
    pub f_val: T,
    pub face: FaceId,
}

impl<T: Scalar> Iterate<T> {
    /// Builds an iterate from a point whose residual is already known.
    pub fn from_residual(problem: &LassoProblem<T>, x: Vec<T>, r: Vec<T>) -> Result<Self> {
        let g = problem.gradient_from_residual(&x, &r);
        let f_val = problem.objective_from_residual(&x, &r);
        let face = face_of(&x, &problem.w, problem.tau)?;
        Ok(Self { x, r, g, f_val, face })
    }
}

/// Objective, gradient, residual and face at `x`.
pub fn evaluate<T: Scalar>(problem: &LassoProblem<T>, x: &[T]) -> Result<Iterate<T>> {
    problem.check_x(x)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(LassoError::DimensionMismatch("x has non-finite entries".into()));
    }
    let r = problem.residual(x);
    Iterate::from_residual(problem, x.to_vec(), r)
}

/// The objective restricted to the ray `x + αd`, which is a scalar quadratic
/// `f(x) + α gᵀd + ½α²(‖Ad‖² + μ‖d‖²)`.
#[derive(Debug, Clone)]
pub struct RayQuadratic<T> {
    pub f0: T,
    /// `gᵀd`
    pub slope: T,
    /// `‖Ad‖² + μ‖d‖²`
    pub curvature: T,
    /// `Ad`, kept so the residual can be advanced without another product.
    pub ad: Vec<T>,
}

impl<T: Scalar> RayQuadratic<T> {
    pub fn new(problem: &LassoProblem<T>, f0: T, g: &[T], d: &[T]) -> Result<Self> {
        problem.check_x(d)?;
        let mut ad = vec![T::zero(); problem.m()];
        problem.op.apply(d, &mut ad);
        let curvature = norm2_sq(&ad) + problem.mu * norm2_sq(d);
        Ok(Self { f0, slope: dot(g, d), curvature, ad })
    }

    pub fn from_iterate(problem: &LassoProblem<T>, it: &Iterate<T>, d: &[T]) -> Result<Self> {
        Self::new(problem, it.f_val, &it.g, d)
    }

    #[inline]
    pub fn value(&self, alpha: T) -> T {
        self.f0 + alpha * self.slope + T::c(0.5) * alpha * alpha * self.curvature
    }

    #[inline]
    pub fn derivative(&self, alpha: T) -> T {
        self.slope + alpha * self.curvature
    }
}

/// `f(x + αd)` evaluated through the ray quadratic.
pub fn objective_along_ray<T: Scalar>(
    problem: &LassoProblem<T>,
    x: &[T],
    d: &[T],
    alpha: T,
) -> Result<T> {
    problem.check_x(x)?;
    let r = problem.residual(x);
    let f0 = problem.objective_from_residual(x, &r);
    let g = problem.gradient_from_residual(x, &r);
    Ok(RayQuadratic::new(problem, f0, &g, d)?.value(alpha))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineSearchMode {
    Backtracking,
    ArcFirstLocal,
    ArcGlobal,
}

#[derive(Debug, Clone)]
pub struct SolverOptions<T> {
    pub opt_tol: T,
    /// `None` means `10·m`.
    pub max_iter: Option<usize>,
    pub history_m: usize,
    pub lbfgs_memory: usize,
    pub bb_min: T,
    pub bb_max: T,
    pub armijo_gamma: T,
    pub armijo_backtrack: T,
    pub wolfe_gamma1: T,
    pub wolfe_gamma2: T,
    pub line_search_mode: LineSearchMode,
    /// Maximum number of step reductions in one backtracking search.
    pub max_backtracks: usize,
    /// Incremental residual updates allowed before a full recompute.
    pub recompute_every: usize,
    /// Record one trace row per iteration.
    pub trace: bool,
}

impl<T: Scalar> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            opt_tol: T::c(1e-6),
            max_iter: None,
            history_m: 10,
            lbfgs_memory: 8,
            bb_min: T::c(1e-10),
            bb_max: T::c(1e10),
            armijo_gamma: T::c(1e-4),
            armijo_backtrack: T::c(0.5),
            wolfe_gamma1: T::c(1e-4),
            wolfe_gamma2: T::c(0.9),
            line_search_mode: LineSearchMode::Backtracking,
            max_backtracks: 50,
            recompute_every: 50,
            trace: false,
        }
    }
}

impl<T: Scalar> SolverOptions<T> {
    pub fn validate(&self) -> Result<()> {
        let zero = T::zero();
        let one = T::one();
        let half = T::c(0.5);
        let bad = |s: &str| Err(LassoError::InvalidParameter(s.to_string()));
        if !(self.opt_tol > zero) {
            return bad("opt_tol must be positive");
        }
        if !(zero < self.bb_min && self.bb_min < self.bb_max) {
            return bad("need 0 < bb_min < bb_max");
        }
        if !(zero < self.wolfe_gamma1
            && self.wolfe_gamma1 < half
            && half < self.wolfe_gamma2
            && self.wolfe_gamma2 < one)
        {
            return bad("need 0 < gamma1 < 1/2 < gamma2 < 1");
        }
        if !(zero < self.armijo_backtrack && self.armijo_backtrack < one) {
            return bad("need 0 < armijo_backtrack < 1");
        }
        if !(zero < self.armijo_gamma && self.armijo_gamma < one) {
            return bad("need 0 < armijo_gamma < 1");
        }
        if self.history_m == 0 || self.lbfgs_memory == 0 {
            return bad("history and memory lengths must be at least 1");
        }
        if self.max_backtracks == 0 || self.recompute_every == 0 {
            return bad("max_backtracks and recompute_every must be at least 1");
        }
        Ok(())
    }

    pub fn iteration_cap(&self, m: usize) -> usize {
        self.max_iter.unwrap_or(10 * m.max(1))
    }
}
