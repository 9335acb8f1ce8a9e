//! Limited-memory BFGS model in reduced (face) coordinates.

use std::collections::VecDeque;

use crate::facebasis::ReducedBasis;
use crate::linalg::{dot, norm2};
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
struct Pair<T> {
    s: Vec<T>,
    y: Vec<T>,
    rho: T,
}

/// Inverse-Hessian approximation `H` built from at most `memory` pairs on
/// top of `h0·I`.
#[derive(Debug, Clone)]
pub struct LbfgsModel<T> {
    memory: usize,
    pairs: VecDeque<Pair<T>>,
    h0: T,
    curvature_eps: T,
    basis: ReducedBasis<T>,
    skipped: usize,
}

impl<T: Scalar> LbfgsModel<T> {
    pub fn new(basis: ReducedBasis<T>, h0: T, memory: usize) -> Self {
        Self {
            memory: memory.max(1),
            pairs: VecDeque::with_capacity(memory),
            h0,
            curvature_eps: T::c(1e-12),
            basis,
            skipped: 0,
        }
    }

    pub fn basis(&self) -> &ReducedBasis<T> {
        &self.basis
    }

    pub fn h0(&self) -> T {
        self.h0
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Pairs rejected by the curvature guard so far.
    pub fn skipped(&self) -> usize {
        self.skipped
    }

    /// Stores `(s, y)` if `sᵀy > ε‖s‖‖y‖`, evicting the oldest pair when full.
    pub fn update(&mut self, s: Vec<T>, y: Vec<T>) -> bool {
        let sy = dot(&s, &y);
        if !(sy > self.curvature_eps * norm2(&s) * norm2(&y)) {
            self.skipped += 1;
            return false;
        }
        if self.pairs.len() == self.memory {
            self.pairs.pop_front();
        }
        self.pairs.push_back(Pair { s, y, rho: T::one() / sy });
        true
    }

    /// `H v` by the two-loop recursion.
    pub fn apply_inverse_hessian(&self, v: &[T]) -> Vec<T> {
        let mut q = v.to_vec();
        let mut a = vec![T::zero(); self.pairs.len()];
        for (k, p) in self.pairs.iter().enumerate().rev() {
            a[k] = p.rho * dot(&p.s, &q);
            for (qi, yi) in q.iter_mut().zip(&p.y) {
                *qi -= a[k] * *yi;
            }
        }
        for qi in q.iter_mut() {
            *qi *= self.h0;
        }
        for (k, p) in self.pairs.iter().enumerate() {
            let b = p.rho * dot(&p.y, &q);
            for (qi, si) in q.iter_mut().zip(&p.s) {
                *qi += (a[k] - b) * *si;
            }
        }
        q
    }
}

/// `−H g` in reduced coordinates.
pub fn lbfgs_direction<T: Scalar>(model: &LbfgsModel<T>, g_reduced: &[T]) -> Vec<T> {
    let mut d = model.apply_inverse_hessian(g_reduced);
    for v in d.iter_mut() {
        *v = -*v;
    }
    d
}

/// Adds a pair to the model; returns whether it passed the curvature guard.
pub fn lbfgs_update<T: Scalar>(model: &mut LbfgsModel<T>, s: Vec<T>, y: Vec<T>) -> bool {
    model.update(s, y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(k: usize, h0: f64, mem: usize) -> LbfgsModel<f64> {
        LbfgsModel::new(ReducedBasis::Identity(k), h0, mem)
    }

    #[test]
    fn empty_model_scales_gradient() {
        let m = model(3, 0.5, 4);
        assert_eq!(lbfgs_direction(&m, &[2.0, -4.0, 1.0]), vec![-1.0, 2.0, -0.5]);
    }

    #[test]
    fn secant_equation() {
        let mut m = model(3, 1.0, 4);
        let s = vec![1.0, 2.0, -1.0];
        assert!(m.update(s.clone(), s.clone()));
        let hy = m.apply_inverse_hessian(&s);
        for (a, b) in hy.iter().zip(&s) {
            assert!((a - b).abs() < 1e-12);
        }
        let mut m = model(2, 0.3, 4);
        m.update(vec![1.0, 0.5], vec![2.0, -0.2]);
        let hy = m.apply_inverse_hessian(&[2.0, -0.2]);
        assert!((hy[0] - 1.0).abs() < 1e-12 && (hy[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn curvature_guard_and_eviction() {
        let mut m = model(2, 1.0, 1);
        assert!(!m.update(vec![1.0, 0.0], vec![-1.0, 0.0]));
        assert_eq!(m.len(), 0);
        assert_eq!(m.skipped(), 1);
        m.update(vec![1.0, 0.0], vec![2.0, 0.0]);
        m.update(vec![0.0, 1.0], vec![0.0, 3.0]);
        assert_eq!(m.len(), 1);
        let hy = m.apply_inverse_hessian(&[0.0, 3.0]);
        assert!((hy[1] - 1.0).abs() < 1e-15);
    }
}
