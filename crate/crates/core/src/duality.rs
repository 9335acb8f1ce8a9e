//! Duality gaps and the best-so-far primal/dual pair used for stopping.
//!
//! All certificates use the dual vector `y = b − Ax`. With the cached
//! gradient `g = Aᵀ(Ax − b) + μx + c` this gives `Aᵀy − μx − c = −g`, so no
//! extra operator products are needed.

use crate::ball::project;
use crate::error::{LassoError, Result};
use crate::linalg::{dot, norm2, norm2_sq, weighted_dual_norm};
use crate::model::{Iterate, LassoProblem};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Formulation {
    MuZero,
    Augmented,
    Optimized,
}

#[derive(Debug, Clone)]
pub struct DualCertificate<T> {
    pub y: Vec<T>,
    pub lambda: T,
    pub dual_obj: T,
    pub formulation: Formulation,
}

/// `‖P(x − g) − x‖ / max(1, ‖g‖)`.
pub fn projected_gradient_residual<T: Scalar>(problem: &LassoProblem<T>, it: &Iterate<T>) -> Result<T> {
    let u: Vec<T> = it.x.iter().zip(&it.g).map(|(x, g)| *x - *g).collect();
    let p = project(&u, &problem.w, problem.tau)?;
    let diff: Vec<T> = p.x.iter().zip(&it.x).map(|(a, b)| *a - *b).collect();
    Ok(norm2(&diff) / T::one().max(norm2(&it.g)))
}

fn clamp_gap<T: Scalar>(gap: T, f: T) -> T {
    if gap < T::zero() && -gap <= T::c(1e-10) * (T::one() + f.abs()) {
        T::zero()
    } else {
        gap
    }
}

fn dual_vector<T: Scalar>(it: &Iterate<T>) -> Vec<T> {
    it.r.iter().map(|v| -*v).collect()
}

/// Gap for `μ = 0`: `‖y‖² + cᵀx − yᵀb + τ‖Aᵀy − c‖_{1/w,∞}`.
pub fn dual_gap_mu_zero<T: Scalar>(problem: &LassoProblem<T>, it: &Iterate<T>) -> Result<(DualCertificate<T>, T)> {
    if problem.mu != T::zero() {
        return Err(LassoError::WrongFormulation("mu = 0; use the augmented or optimized dual"));
    }
    let y = dual_vector(it);
    let lambda = weighted_dual_norm(&it.g, &problem.w);
    let yb = dot(&y, &problem.b);
    let yy = norm2_sq(&y);
    let dual_obj = yb - problem.tau * lambda - T::c(0.5) * yy;
    let gap = clamp_gap(it.f_val - dual_obj, it.f_val);
    Ok((DualCertificate { y, lambda, dual_obj, formulation: Formulation::MuZero }, gap))
}

/// Gap for `μ > 0` from the stacked least-squares reformulation.
pub fn dual_gap_augmented<T: Scalar>(problem: &LassoProblem<T>, it: &Iterate<T>) -> Result<(DualCertificate<T>, T)> {
    if !(problem.mu > T::zero()) {
        return Err(LassoError::WrongFormulation("mu > 0"));
    }
    let y = dual_vector(it);
    let lambda = weighted_dual_norm(&it.g, &problem.w);
    let half = T::c(0.5);
    let dual_obj =
        dot(&y, &problem.b) - problem.tau * lambda - half * norm2_sq(&y) - half * problem.mu * norm2_sq(&it.x);
    let gap = clamp_gap(it.f_val - dual_obj, it.f_val);
    Ok((DualCertificate { y, lambda, dual_obj, formulation: Formulation::Augmented }, gap))
}

/// `argmin_{λ≥0} τλ + (1/2μ)‖[z − λw]_+‖²`.
///
/// The derivative vanishes where `Σ w_i[z_i − λw_i]_+ = μτ`, which is the
/// projection threshold for radius `μτ`.
pub fn optimal_dual_lambda<T: Scalar>(z: &[T], w: &[T], tau: T, mu: T) -> T {
    crate::ball::threshold_level(z, w, mu * tau)
}

/// `yᵀb − τλ − ½‖y‖² − (1/2μ)‖[z − λw]_+‖²` with `z = |Aᵀy − c|`.
pub fn optimized_dual_objective<T: Scalar>(problem: &LassoProblem<T>, it: &Iterate<T>, lambda: T) -> T {
    let y = dual_vector(it);
    let mut pen = T::zero();
    for i in 0..problem.n() {
        let z = (it.g[i] - problem.mu * it.x[i]).abs();
        let v = (z - lambda * problem.w[i]).max(T::zero());
        pen += v * v;
    }
    let half = T::c(0.5);
    dot(&y, &problem.b) - problem.tau * lambda - half * norm2_sq(&y) - half * pen / problem.mu
}

/// Gap for `μ > 0` using the dual with the optimal `λ`.
pub fn dual_gap_optimized<T: Scalar>(problem: &LassoProblem<T>, it: &Iterate<T>) -> Result<(DualCertificate<T>, T)> {
    if !(problem.mu > T::zero()) {
        return Err(LassoError::WrongFormulation("mu > 0"));
    }
    let z: Vec<T> = it.g.iter().zip(&it.x).map(|(g, x)| (*g - problem.mu * *x).abs()).collect();
    let lambda = optimal_dual_lambda(&z, &problem.w, problem.tau, problem.mu);
    let dual_obj = optimized_dual_objective(problem, it, lambda);
    let gap = clamp_gap(it.f_val - dual_obj, it.f_val);
    Ok((DualCertificate { y: dual_vector(it), lambda, dual_obj, formulation: Formulation::Optimized }, gap))
}

/// The strongest available certificate: `μ = 0` dual or optimized dual.
pub fn best_certificate<T: Scalar>(problem: &LassoProblem<T>, it: &Iterate<T>) -> (DualCertificate<T>, T) {
    let res = if problem.mu == T::zero() { dual_gap_mu_zero(problem, it) } else { dual_gap_optimized(problem, it) };
    res.expect("formulation chosen by mu")
}

/// Best primal point and best dual certificate seen so far.
#[derive(Debug, Clone)]
pub struct BestPair<T> {
    pub best_x: Vec<T>,
    pub best_f: T,
    pub best_dual: Option<DualCertificate<T>>,
}

impl<T: Scalar> Default for BestPair<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> BestPair<T> {
    pub fn new() -> Self {
        Self { best_x: Vec::new(), best_f: T::infinity(), best_dual: None }
    }

    /// Folds in a new iterate and returns the relative gap.
    pub fn update(&mut self, problem: &LassoProblem<T>, it: &Iterate<T>) -> T {
        if it.f_val < self.best_f || self.best_x.is_empty() {
            self.best_f = it.f_val;
            self.best_x = it.x.clone();
        }
        let (cert, _) = best_certificate(problem, it);
        let better = match &self.best_dual {
            None => true,
            Some(c) => cert.dual_obj > c.dual_obj,
        };
        if better {
            self.best_dual = Some(cert);
        }
        self.gap_relative()
    }

    pub fn best_dual_obj(&self) -> T {
        self.best_dual.as_ref().map_or(T::neg_infinity(), |c| c.dual_obj)
    }

    /// Dual multiplier of the best certificate.
    pub fn best_lambda(&self) -> T {
        self.best_dual.as_ref().map_or(T::zero(), |c| c.lambda)
    }

    /// `(f_best − dual_best) / max(f_best, 1e-3)`.
    pub fn gap_relative(&self) -> T {
        let gap = clamp_gap(self.best_f - self.best_dual_obj(), self.best_f);
        gap / self.best_f.max(T::c(1e-3))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopDecision {
    Continue,
    Optimal,
}

pub fn stopping_oracle<T: Scalar>(best: &BestPair<T>, opt_tol: T) -> StopDecision {
    if best.gap_relative() <= opt_tol {
        StopDecision::Optimal
    } else {
        StopDecision::Continue
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{evaluate, DenseMatrix};

    #[test]
    fn gap_at_origin() {
        let a = DenseMatrix::from_fn(3, 2, |i, j| (i + 2 * j) as f64 * 0.5 - 0.7);
        let p = LassoProblem::from_dense(a, vec![1.0, -1.0, 2.0], 0.8)
            .unwrap()
            .with_weights(vec![0.5, 2.0])
            .unwrap();
        let it = evaluate(&p, &[0.0, 0.0]).unwrap();
        let (_, gap) = dual_gap_mu_zero(&p, &it).unwrap();
        let mut atb = vec![0.0; 2];
        p.op.apply_adjoint(&p.b, &mut atb);
        let want = 0.8 * weighted_dual_norm(&atb, &p.w);
        assert!((gap - want).abs() < 1e-14);
    }

    #[test]
    fn scalar_lambda() {
        for (tau, mu) in [(0.3, 0.5), (5.0, 1.0), (0.1, 0.01)] {
            let got = optimal_dual_lambda(&[1.0], &[1.0], tau, mu);
            let want = (1.0f64 - mu * tau).max(0.0);
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn formulation_guards() {
        let p = LassoProblem::from_dense(DenseMatrix::identity(2), vec![1.0, 0.0], 1.0).unwrap();
        let it = evaluate(&p, &[0.5, 0.0]).unwrap();
        assert!(dual_gap_augmented(&p, &it).is_err());
        let q = p.clone().with_mu(0.1).unwrap();
        let it = evaluate(&q, &[0.5, 0.0]).unwrap();
        assert!(dual_gap_mu_zero(&q, &it).is_err());
    }

    #[test]
    fn clamp_scalar_problem() {
        // min ½(x−2)², |x| ≤ 1: optimum x = 1
        let p = LassoProblem::from_dense(DenseMatrix::<f64>::identity(1), vec![2.0], 1.0).unwrap();
        let it = evaluate(&p, &[1.0]).unwrap();
        assert_eq!(projected_gradient_residual(&p, &it).unwrap(), 0.0);
        let (_, gap) = dual_gap_mu_zero(&p, &it).unwrap();
        assert!(gap.abs() < 1e-15);
    }
}
