//! Weighted one-norm ball `{x : Σ w_i|x_i| ≤ τ}`: prox, projection, faces,
//! self-projection cone and step bounds along a face.

use crate::error::{LassoError, Result};
use crate::linalg::weighted_l1;
use crate::scalar::Scalar;

/// The face of the ball containing a point in its relative interior.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FaceId {
    /// The point is strictly inside, so the face is the whole ball.
    Interior,
    /// A proper face, identified by the sign pattern of the point.
    Proper { signs: Vec<i8> },
}

impl FaceId {
    pub fn is_interior(&self) -> bool {
        matches!(self, FaceId::Interior)
    }

    /// Indices with nonzero sign; empty for the interior.
    pub fn support(&self) -> Vec<usize> {
        match self {
            FaceId::Interior => Vec::new(),
            FaceId::Proper { signs } => {
                signs.iter().enumerate().filter(|(_, s)| **s != 0).map(|(i, _)| i).collect()
            }
        }
    }

    /// Dimension of the face: `n` for the interior, `|I| − 1` for a proper face.
    pub fn dim(&self, n: usize) -> usize {
        match self {
            FaceId::Interior => n,
            FaceId::Proper { signs } => signs.iter().filter(|s| **s != 0).count().saturating_sub(1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProxResult<T> {
    pub x: Vec<T>,
    pub lambda: T,
}

/// Componentwise `sign(u)·max(|u| − λw, 0)`.
pub fn prox_weighted_l1<T: Scalar>(u: &[T], lambda: T, w: &[T]) -> Result<Vec<T>> {
    if !(lambda >= T::zero()) {
        return Err(LassoError::InvalidParameter("prox threshold must be nonnegative".into()));
    }
    if u.len() != w.len() {
        return Err(LassoError::DimensionMismatch("u and w differ in length".into()));
    }
    Ok(soft_threshold(u, lambda, w))
}

pub(crate) fn soft_threshold<T: Scalar>(u: &[T], lambda: T, w: &[T]) -> Vec<T> {
    u.iter()
        .zip(w)
        .map(|(&ui, &wi)| {
            let m = ui.abs() - lambda * wi;
            if m > T::zero() {
                m.copysign(ui)
            } else {
                T::zero()
            }
        })
        .collect()
}

/// Smallest `λ ≥ 0` with `Σ w_i·max(a_i − λw_i, 0) ≤ radius`, for `a ≥ 0`.
///
/// Breakpoints `a_i / w_i` are visited in decreasing order while the active
/// sums are accumulated.
pub fn threshold_level<T: Scalar>(a: &[T], w: &[T], radius: T) -> T {
    let total: T = a.iter().zip(w).map(|(ai, wi)| *ai * *wi).sum();
    if total <= radius {
        return T::zero();
    }
    let mut bp: Vec<(T, usize)> = a
        .iter()
        .zip(w)
        .enumerate()
        .filter(|(_, (ai, _))| **ai > T::zero())
        .map(|(i, (ai, wi))| (*ai / *wi, i))
        .collect();
    bp.sort_unstable_by(|x, y| y.0.partial_cmp(&x.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut s1 = T::zero();
    let mut s2 = T::zero();
    for k in 0..bp.len() {
        let i = bp[k].1;
        s1 += w[i] * a[i];
        s2 += w[i] * w[i];
        let lam = (s1 - radius) / s2;
        if k + 1 == bp.len() || lam >= bp[k + 1].0 {
            return lam.max(T::zero());
        }
    }
    T::zero()
}

/// Euclidean projection onto the weighted one-norm ball of radius `tau`.
pub fn project<T: Scalar>(u: &[T], w: &[T], tau: T) -> Result<ProxResult<T>> {
    if !(tau >= T::zero()) {
        return Err(LassoError::InvalidRadius);
    }
    if u.len() != w.len() {
        return Err(LassoError::DimensionMismatch("u and w differ in length".into()));
    }
    if weighted_l1(u, w) <= tau {
        return Ok(ProxResult { x: u.to_vec(), lambda: T::zero() });
    }
    let a: Vec<T> = u.iter().map(|v| v.abs()).collect();
    let lambda = threshold_level(&a, w, tau);
    Ok(ProxResult { x: soft_threshold(u, lambda, w), lambda })
}

/// Identifies the face of `x`. Points within `feas_tol` (relative) of the
/// boundary are classified as boundary points.
pub fn face_of<T: Scalar>(x: &[T], w: &[T], tau: T) -> Result<FaceId> {
    let norm = weighted_l1(x, w);
    let tol = T::feas_tol();
    if norm > tau * (T::one() + tol) {
        return Err(LassoError::Infeasible { norm: norm.to_f64_lossy(), tau: tau.to_f64_lossy() });
    }
    if tau == T::zero() || norm < tau * (T::one() - tol) {
        return Ok(FaceId::Interior);
    }
    let signs = x
        .iter()
        .map(|v| {
            if *v > T::zero() {
                1
            } else if *v < T::zero() {
                -1
            } else {
                0
            }
        })
        .collect();
    Ok(FaceId::Proper { signs })
}

fn on_boundary<T: Scalar>(x: &[T], w: &[T], tau: T) -> bool {
    tau > T::zero() && weighted_l1(x, w) >= tau * (T::one() - T::feas_tol())
}

/// Sums used by the cone test: `(Σ_I sgn(x_i)d_i w_i, Σ_I w_i², Σ_{∉I}|d_i|w_i, max_{∉I}|d_i|/w_i)`.
fn cone_sums<T: Scalar>(x: &[T], d: &[T], w: &[T]) -> (T, T, T, Option<T>) {
    let mut a = T::zero();
    let mut b = T::zero();
    let mut off_sum = T::zero();
    let mut off_max: Option<T> = None;
    for i in 0..x.len() {
        if x[i] != T::zero() {
            a += x[i].signum() * d[i] * w[i];
            b += w[i] * w[i];
        } else {
            off_sum += d[i].abs() * w[i];
            let q = d[i].abs() / w[i];
            off_max = Some(off_max.map_or(q, |m: T| m.max(q)));
        }
    }
    (a, b, off_sum, off_max)
}

/// Whether a small step along `d` followed by projection stays on the face of `x`.
///
/// Both inequalities must hold with an absolute margin; equality cases are
/// reported as outside the cone.
pub fn in_self_projection_cone<T: Scalar>(x: &[T], d: &[T], w: &[T], tau: T) -> bool {
    if !on_boundary(x, w, tau) {
        return true;
    }
    let slack = T::cone_slack();
    let (a, b, off_sum, off_max) = cone_sums(x, d, w);
    if !(a + off_sum > slack) {
        return false;
    }
    match off_max {
        None => true,
        Some(m) => a / b - m > slack,
    }
}

/// First `α ≥ 0` at which `‖x + αd‖_{w,1}` reaches `tau` from below, walking
/// the zero crossings of the ray in order. Returns zero when the ray is
/// already leaving the ball and infinity when it never reaches the boundary.
pub fn first_boundary_hit<T: Scalar>(x: &[T], d: &[T], w: &[T], tau: T) -> T {
    let mut kappa = weighted_l1(x, w);
    let mut rho = T::zero();
    let mut crossings: Vec<(T, usize)> = Vec::new();
    for i in 0..x.len() {
        if d[i] == T::zero() {
            continue;
        }
        if x[i] * d[i] < T::zero() {
            crossings.push((-x[i] / d[i], i));
            rho -= w[i] * d[i].abs();
        } else {
            rho += w[i] * d[i].abs();
        }
    }
    crossings.sort_unstable_by(|p, q| p.0.partial_cmp(&q.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut alpha = T::zero();
    for (t, i) in crossings {
        if rho > T::zero() {
            let hit = alpha + (tau - kappa) / rho;
            if hit <= t {
                return hit.max(T::zero());
            }
        }
        kappa += rho * (t - alpha);
        alpha = t;
        rho += T::c(2.0) * w[i] * d[i].abs();
    }
    if rho > T::zero() {
        (alpha + (tau - kappa) / rho).max(T::zero())
    } else {
        T::infinity()
    }
}

/// Largest step along `d` that keeps `x + αd` in the closure of the face of `x`.
///
/// For a direction lying in the face this is the first coordinate reaching
/// zero. For interior points, and for boundary points with a norm-decreasing
/// direction, it is the next boundary intersection. Directions leaving the
/// ball give zero.
pub fn max_step_on_face<T: Scalar>(x: &[T], d: &[T], w: &[T], tau: T) -> T {
    if !on_boundary(x, w, tau) {
        return first_boundary_hit(x, d, w, tau);
    }
    let (a, _, off_sum, _) = cone_sums(x, d, w);
    let scale: T = x
        .iter()
        .zip(d)
        .zip(w)
        .filter(|((xi, _), _)| **xi != T::zero())
        .map(|((_, di), wi)| di.abs() * *wi)
        .sum();
    let rel = T::c(1e-10).max(T::epsilon() * T::c(64.0));
    if off_sum == T::zero() && a.abs() <= rel * scale {
        let mut best = T::infinity();
        for i in 0..x.len() {
            if x[i] * d[i] < T::zero() {
                best = best.min(-x[i] / d[i]);
            }
        }
        best
    } else if a + off_sum < T::zero() {
        first_boundary_hit(x, d, w, tau)
    } else {
        T::zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prox_hand_example() {
        assert_eq!(prox_weighted_l1(&[3.0, -1.0], 2.0, &[1.0, 1.0]).unwrap(), vec![1.0, 0.0]);
        assert_eq!(prox_weighted_l1(&[3.0, -1.0], 0.0, &[1.0, 1.0]).unwrap(), vec![3.0, -1.0]);
        assert!(prox_weighted_l1(&[1.0], -1.0, &[1.0]).is_err());
    }

    #[test]
    fn project_single_coordinate() {
        let p = project(&[2.0, 0.0], &[1.0, 1.0], 1.0).unwrap();
        assert_eq!(p.x, vec![1.0, 0.0]);
        assert_eq!(p.lambda, 1.0);
        let q = project(&[0.2, -0.3], &[1.0, 1.0], 1.0).unwrap();
        assert_eq!(q.x, vec![0.2, -0.3]);
        assert_eq!(q.lambda, 0.0);
        assert!(project(&[1.0], &[1.0], -1.0).is_err());
    }

    #[test]
    fn project_onto_zero_radius() {
        let p = project(&[2.0, -3.0], &[1.0, 2.0], 0.0).unwrap();
        assert_eq!(p.x, vec![0.0, 0.0]);
        assert_eq!(p.lambda, 2.0);
    }

    #[test]
    fn ties_at_threshold_go_to_zero() {
        // |u| = (2, 1, 1), tau = 1: lambda = 1 and the tied entries vanish.
        let p = project(&[2.0, 1.0, -1.0], &[1.0; 3], 1.0).unwrap();
        assert_eq!(p.lambda, 1.0);
        assert_eq!(p.x, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn faces() {
        assert_eq!(face_of(&[0.0, 0.0], &[1.0, 1.0], 1.0).unwrap(), FaceId::Interior);
        assert_eq!(
            face_of(&[0.5, 0.0, 0.0], &[2.0, 1.0, 1.0], 1.0).unwrap(),
            FaceId::Proper { signs: vec![1, 0, 0] }
        );
        assert!(matches!(face_of(&[2.0, 0.0], &[1.0, 1.0], 1.0), Err(LassoError::Infeasible { .. })));
        let f = FaceId::Proper { signs: vec![1, 0, -1] };
        assert_eq!(f.support(), vec![0, 2]);
        assert_eq!(f.dim(3), 1);
    }

    #[test]
    fn cone_hand_examples() {
        assert!(in_self_projection_cone(&[0.1, 0.2], &[5.0, -3.0], &[1.0, 1.0], 1.0));
        assert!(!in_self_projection_cone(&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0], 1.0));
        assert!(in_self_projection_cone(&[1.0, 0.0], &[1.0, 0.5], &[1.0, 1.0], 1.0));
        // moving along the face is an equality case, reported as outside
        assert!(!in_self_projection_cone(&[0.5, 0.5], &[1.0, -1.0], &[1.0, 1.0], 1.0));
    }

    #[test]
    fn max_step_examples() {
        assert_eq!(max_step_on_face(&[0.5, 0.5], &[1.0, -1.0], &[1.0, 1.0], 1.0), 0.5);
        assert!(max_step_on_face(&[1.0, 0.0], &[0.0, 0.0], &[1.0, 1.0], 1.0f64).is_infinite());
        // interior: ‖(0.25,0) + α(1,1)‖ = 0.25 + 2α = 1 at α = 0.375
        assert!((max_step_on_face(&[0.25, 0.0], &[1.0, 1.0], &[1.0, 1.0], 1.0f64) - 0.375).abs() < 1e-15);
        // boundary, norm decreasing then increasing again: (1,0) + α(−1, 0.25)
        // norm = 1 − 0.75α until α = 1, then back up with slope 1.25
        let s = max_step_on_face(&[1.0, 0.0], &[-1.0, 0.25], &[1.0, 1.0], 1.0f64);
        assert!((s - (1.0 + 0.75 / 1.25)).abs() < 1e-14, "{s}");
    }

    #[test]
    fn threshold_level_matches_projection_equation() {
        let a = [3.0f64, 1.0, 0.5, 2.0];
        let w = [1.0f64, 0.5, 2.0, 1.5];
        let lam = threshold_level(&a, &w, 1.0);
        let s: f64 = a.iter().zip(&w).map(|(ai, wi)| wi * (ai - lam * wi).max(0.0)).sum();
        assert!((s - 1.0).abs() < 1e-14);
    }
}
