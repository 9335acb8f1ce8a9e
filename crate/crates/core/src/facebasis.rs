//! Orthonormal basis of the difference space of a face of the weighted
//! one-norm ball, applied in linear time.
//!
//! A face with support `I` (ascending, `|I| = k+1`) and signs `σ` has
//! vertices `τ σ_i w_i^{-1} e_i`. After flipping signs, the difference space
//! is spanned by Gram–Schmidt on `v_j − v_0` with `v_p = ŵ_p e_p`, where
//! `ŵ = 1/w`. Column `j` of the resulting `Q` (for `j = 1..k`) is
//!
//! ```text
//! Q[p, j] = ŵ_p · C[p, j] / √γ_j,   C[j, j] = 1,   C[p, j] = u_p · μ_{p+1} ⋯ μ_{j−1}  (p < j)
//! ```
//!
//! with positions counted from 0 and
//!
//! ```text
//! α_1 = ŵ_0²,  u_0 = −1,
//! γ_j = α_j + ŵ_j²,  μ_j = ŵ_j²/γ_j,  u_j = −α_j/γ_j,  α_{j+1} = α_j μ_j.
//! ```
//!
//! In terms of the weights themselves, with `W_j = w_0² + … + w_{j−1}²`, this
//! is `Q[:, j] = (W_j e_j − w_j w_{<j}) / √(W_j W_{j+1})`, which the tests use
//! as the dense reference.

use crate::ball::FaceId;
use crate::error::{LassoError, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct FaceBasis<T> {
    n: usize,
    support: Vec<usize>,
    signs: Vec<T>,
    /// Inverse weights on the support, `ŵ_p = 1/w_{I[p]}`.
    w_hat: Vec<T>,
    /// `α_j`, `j = 1..k`, stored at `j − 1`.
    alpha: Vec<T>,
    /// `1/√γ_j`, `j = 1..k`, stored at `j − 1`.
    inv_sqrt_gamma: Vec<T>,
    /// `μ_j`, `j = 1..k`, stored at `j − 1`.
    mu: Vec<T>,
    /// `u_p`, `p = 0..k`.
    u: Vec<T>,
}

impl<T: Scalar> FaceBasis<T> {
    /// Builds the basis for a proper face with at least two support entries.
    pub fn new(face: &FaceId, w: &[T]) -> Result<Self> {
        let signs_i8 = match face {
            FaceId::Interior => {
                return Err(LassoError::InvalidParameter(
                    "face basis is only defined for proper faces".into(),
                ))
            }
            FaceId::Proper { signs } => signs,
        };
        if signs_i8.len() != w.len() {
            return Err(LassoError::DimensionMismatch("face and weights differ in length".into()));
        }
        let support = face.support();
        if support.len() < 2 {
            return Err(LassoError::VertexFace);
        }
        let k = support.len() - 1;
        let signs: Vec<T> = support.iter().map(|&i| T::c(signs_i8[i] as f64)).collect();
        let w_hat: Vec<T> = support.iter().map(|&i| T::one() / w[i]).collect();

        let tiny = T::min_positive_value().max(T::c(1e-300));
        let mut alpha = Vec::with_capacity(k);
        let mut inv_sqrt_gamma = Vec::with_capacity(k);
        let mut mu = Vec::with_capacity(k);
        let mut u = Vec::with_capacity(k + 1);
        u.push(-T::one());
        let mut a = w_hat[0] * w_hat[0];
        for j in 1..=k {
            let wh2 = w_hat[j] * w_hat[j];
            let gamma = a + wh2;
            if !(gamma >= tiny) || !gamma.is_finite() {
                return Err(LassoError::NumericalUnderflow);
            }
            alpha.push(a);
            inv_sqrt_gamma.push(T::one() / gamma.sqrt());
            let m = wh2 / gamma;
            mu.push(m);
            u.push(-a / gamma);
            a = a * m;
        }
        Ok(Self { n: w.len(), support, signs, w_hat, alpha, inv_sqrt_gamma, mu, u })
    }

    /// Reduced dimension `k = |I| − 1`.
    pub fn dim(&self) -> usize {
        self.support.len() - 1
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn alpha_seq(&self) -> &[T] {
        &self.alpha
    }

    pub fn inv_sqrt_gamma_seq(&self) -> &[T] {
        &self.inv_sqrt_gamma
    }

    pub fn mu_seq(&self) -> &[T] {
        &self.mu
    }

    pub fn u_seq(&self) -> &[T] {
        &self.u
    }

    /// `y = Q v` on the support positions, before signs and embedding.
    fn q_apply(&self, v: &[T], y: &mut [T]) {
        let k = self.dim();
        // t holds Σ_{j>p} μ_{p+1}⋯μ_{j−1} s_j with s_j = v_j/√γ_j.
        let mut t = T::zero();
        for p in (1..=k).rev() {
            let s_p = v[p - 1] * self.inv_sqrt_gamma[p - 1];
            y[p] = self.w_hat[p] * (s_p + self.u[p] * t);
            t = s_p + self.mu[p - 1] * t;
        }
        y[0] = self.w_hat[0] * self.u[0] * t;
    }

    /// `y = Qᵀ z` for `z` on the support positions.
    fn q_apply_adjoint(&self, z: &[T], y: &mut [T]) {
        let k = self.dim();
        let mut r = self.w_hat[0] * z[0] * self.u[0];
        for j in 1..=k {
            let s = self.w_hat[j] * z[j];
            y[j - 1] = (r + s) * self.inv_sqrt_gamma[j - 1];
            r = self.mu[j - 1] * r + s * self.u[j];
        }
    }

    /// `Φ v`, an `n`-vector supported on the face.
    pub fn apply(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.dim() {
            return Err(LassoError::DimensionMismatch(format!(
                "coefficient vector has length {}, basis has {} columns",
                v.len(),
                self.dim()
            )));
        }
        let mut y = vec![T::zero(); self.support.len()];
        self.q_apply(v, &mut y);
        let mut out = vec![T::zero(); self.n];
        for (p, &i) in self.support.iter().enumerate() {
            out[i] = self.signs[p] * y[p];
        }
        Ok(out)
    }

    /// `Φᵀ z` for an `n`-vector `z`.
    pub fn apply_adjoint(&self, z: &[T]) -> Result<Vec<T>> {
        if z.len() != self.n {
            return Err(LassoError::DimensionMismatch(format!(
                "vector has length {}, expected {}",
                z.len(),
                self.n
            )));
        }
        let zs: Vec<T> = self.support.iter().enumerate().map(|(p, &i)| self.signs[p] * z[i]).collect();
        let mut y = vec![T::zero(); self.dim()];
        self.q_apply_adjoint(&zs, &mut y);
        Ok(y)
    }

    /// `anchor + Φ c`.
    pub fn embed_face_point(&self, anchor: &[T], coeff: &[T]) -> Result<Vec<T>> {
        let mut out = self.apply(coeff)?;
        if anchor.len() != self.n {
            return Err(LassoError::DimensionMismatch("anchor has wrong length".into()));
        }
        for (o, a) in out.iter_mut().zip(anchor) {
            *o += *a;
        }
        Ok(out)
    }
}

/// Basis used by the quasi-Newton model: the identity when the iterate is
/// strictly inside the ball, a face basis otherwise.
#[derive(Debug, Clone)]
pub enum ReducedBasis<T> {
    Identity(usize),
    Face(FaceBasis<T>),
}

impl<T: Scalar> ReducedBasis<T> {
    pub fn for_face(face: &FaceId, w: &[T]) -> Result<Self> {
        match face {
            FaceId::Interior => Ok(ReducedBasis::Identity(w.len())),
            _ => Ok(ReducedBasis::Face(FaceBasis::new(face, w)?)),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ReducedBasis::Identity(n) => *n,
            ReducedBasis::Face(b) => b.dim(),
        }
    }

    pub fn apply(&self, v: &[T]) -> Result<Vec<T>> {
        match self {
            ReducedBasis::Identity(_) => Ok(v.to_vec()),
            ReducedBasis::Face(b) => b.apply(v),
        }
    }

    pub fn apply_adjoint(&self, z: &[T]) -> Result<Vec<T>> {
        match self {
            ReducedBasis::Identity(_) => Ok(z.to_vec()),
            ReducedBasis::Face(b) => b.apply_adjoint(z),
        }
    }
}
