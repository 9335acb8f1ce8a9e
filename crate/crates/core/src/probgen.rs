//! Reproducible synthetic problems.
//!
//! All randomness comes from ChaCha20 seeded with `seed_from_u64(seed)`.
//! Within an instance the matrix, the signal and the noise use streams 0, 1
//! and 2 of that generator, so changing one part never shifts another.

use rand::seq::index::sample;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{LassoError, Result};
use crate::linalg::{dot, norm2, weighted_l1};
use crate::model::{DenseMatrix, LinearOperator};

const MATRIX_STREAM: u64 = 0;
const SIGNAL_STREAM: u64 = 1;
const NOISE_STREAM: u64 = 2;

fn rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut r = ChaCha20Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum MatrixKind {
    GaussianUnitColumns,
    SphereWalk { gamma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalDist {
    PmOne,
    Uniform,
    Gaussian,
}

impl SignalDist {
    pub fn as_str(&self) -> &'static str {
        match self {
            SignalDist::PmOne => "pm_one",
            SignalDist::Uniform => "uniform",
            SignalDist::Gaussian => "gaussian",
        }
    }
}

impl std::str::FromStr for SignalDist {
    type Err = LassoError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pm_one" | "pm-one" => Ok(SignalDist::PmOne),
            "uniform" => Ok(SignalDist::Uniform),
            "gaussian" | "normal" => Ok(SignalDist::Gaussian),
            other => Err(LassoError::InvalidParameter(format!("unknown signal distribution '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GeneratorSpec {
    pub m: usize,
    pub n: usize,
    pub kind: MatrixKind,
    pub signal: SignalDist,
    pub k: usize,
    /// `‖v‖₂ / ‖Ax₀‖₂` for the additive noise `v`.
    pub noise_fraction: f64,
    pub seed: u64,
    /// `τ = tau_mult·‖x₀‖₁`.
    pub tau_mult: f64,
    /// `σ = sigma_frac·‖b‖₂` when set.
    pub sigma_frac: Option<f64>,
}

impl GeneratorSpec {
    pub fn new(m: usize, n: usize, k: usize, signal: SignalDist, seed: u64) -> Self {
        Self {
            m,
            n,
            kind: MatrixKind::GaussianUnitColumns,
            signal,
            k,
            noise_fraction: 0.0,
            seed,
            tau_mult: 0.99,
            sigma_frac: None,
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct InstanceMetadata {
    pub spec: GeneratorSpec,
    pub x0_norm1: f64,
    pub b_norm2: f64,
    pub tau: f64,
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub a: DenseMatrix<f64>,
    pub b: Vec<f64>,
    pub x0: Vec<f64>,
    pub tau: f64,
    pub sigma: Option<f64>,
    pub metadata: InstanceMetadata,
}

fn normalize(v: &mut [f64]) -> f64 {
    let nv = norm2(v);
    if nv > 0.0 {
        v.iter_mut().for_each(|x| *x /= nv);
    }
    nv
}

fn gaussian_vector(r: &mut ChaCha20Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| r.sample(StandardNormal)).collect()
}

/// I.i.d. Gaussian matrix with columns scaled to unit norm.
pub fn gen_gaussian(m: usize, n: usize, seed: u64) -> DenseMatrix<f64> {
    let mut r = rng(seed, MATRIX_STREAM);
    let mut a = DenseMatrix::zeros(m, n);
    for j in 0..n {
        let col = a.col_mut(j);
        loop {
            for v in col.iter_mut() {
                *v = r.sample(StandardNormal);
            }
            if normalize(col) > 0.0 {
                break;
            }
        }
    }
    a
}

/// Columns from a random walk on the unit sphere with
/// `⟨a_k, a_{k+1}⟩ = 1 − γ`.
pub fn gen_sphere_walk(m: usize, n: usize, gamma: f64, seed: u64) -> Result<DenseMatrix<f64>> {
    let c1 = 1.0 - gamma;
    if !(c1.abs() <= 1.0) {
        return Err(LassoError::InvalidParameter(format!("gamma must lie in [0, 2], got {gamma}")));
    }
    if m < 2 {
        return Err(LassoError::InvalidParameter("sphere walk needs m >= 2".into()));
    }
    let c2 = (1.0 - c1 * c1).max(0.0).sqrt();
    let mut r = rng(seed, MATRIX_STREAM);
    let mut a = DenseMatrix::zeros(m, n);
    if n == 0 {
        return Ok(a);
    }
    let mut cur = gaussian_vector(&mut r, m);
    while normalize(&mut cur) == 0.0 {
        cur = gaussian_vector(&mut r, m);
    }
    a.col_mut(0).copy_from_slice(&cur);
    for j in 1..n {
        let perp = loop {
            let mut v = gaussian_vector(&mut r, m);
            // two passes of Gram–Schmidt keep ⟨v, a_k⟩ at rounding level
            for _ in 0..2 {
                let p = dot(&v, &cur);
                v.iter_mut().zip(&cur).for_each(|(vi, ci)| *vi -= p * ci);
            }
            if normalize(&mut v) > 1e-8 {
                break v;
            }
        };
        let mut next: Vec<f64> = cur.iter().zip(&perp).map(|(c, p)| c1 * c + c2 * p).collect();
        normalize(&mut next);
        a.col_mut(j).copy_from_slice(&next);
        cur = next;
    }
    Ok(a)
}

/// `k`-sparse vector on a uniformly random support.
pub fn gen_sparse_signal(n: usize, k: usize, dist: SignalDist, seed: u64) -> Result<Vec<f64>> {
    if k > n {
        return Err(LassoError::InvalidParameter(format!("sparsity {k} exceeds dimension {n}")));
    }
    let mut r = rng(seed, SIGNAL_STREAM);
    let mut x = vec![0.0; n];
    let mut support = sample(&mut r, n, k).into_vec();
    support.sort_unstable();
    for i in support {
        x[i] = loop {
            let v = match dist {
                SignalDist::PmOne => {
                    if r.gen::<bool>() {
                        1.0
                    } else {
                        -1.0
                    }
                }
                SignalDist::Uniform => r.gen_range(-1.0..1.0),
                SignalDist::Gaussian => r.sample(StandardNormal),
            };
            if v != 0.0 {
                break v;
            }
        };
    }
    Ok(x)
}

/// Builds `A`, `x₀` and `b = Ax₀ + v` with the radius and misfit targets.
pub fn gen_instance(spec: &GeneratorSpec) -> Result<Instance> {
    if !(spec.noise_fraction >= 0.0) || !(spec.tau_mult > 0.0) {
        return Err(LassoError::InvalidParameter("noise_fraction >= 0 and tau_mult > 0 required".into()));
    }
    if spec.m == 0 || spec.n == 0 {
        return Err(LassoError::InvalidParameter("dimensions must be positive".into()));
    }
    let a = match spec.kind {
        MatrixKind::GaussianUnitColumns => gen_gaussian(spec.m, spec.n, spec.seed),
        MatrixKind::SphereWalk { gamma } => gen_sphere_walk(spec.m, spec.n, gamma, spec.seed)?,
    };
    let x0 = gen_sparse_signal(spec.n, spec.k, spec.signal, spec.seed)?;
    let mut b = vec![0.0; spec.m];
    a.apply(&x0, &mut b);
    if spec.noise_fraction > 0.0 {
        let mut r = rng(spec.seed, NOISE_STREAM);
        let mut v = gaussian_vector(&mut r, spec.m);
        let scale = spec.noise_fraction * norm2(&b) / norm2(&v);
        v.iter_mut().for_each(|x| *x *= scale);
        b.iter_mut().zip(&v).for_each(|(bi, vi)| *bi += vi);
    }
    let x0_norm1 = weighted_l1(&x0, &vec![1.0; spec.n]);
    let b_norm2 = norm2(&b);
    let tau = spec.tau_mult * x0_norm1;
    let sigma = spec.sigma_frac.map(|f| f * b_norm2);
    let metadata = InstanceMetadata { spec: spec.clone(), x0_norm1, b_norm2, tau, sigma };
    Ok(Instance { a, b, x0, tau, sigma, metadata })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn walk_extremes() {
        let a = gen_sphere_walk(5, 6, 1.0, 3).unwrap();
        for j in 1..6 {
            assert!(dot(a.col(j - 1), a.col(j)).abs() < 1e-12);
        }
        let a = gen_sphere_walk(4, 3, 2.0, 3).unwrap();
        for i in 0..4 {
            assert!((a.get(i, 1) + a.get(i, 0)).abs() < 1e-15);
        }
        assert!(gen_sphere_walk(4, 3, 2.5, 0).is_err());
        assert!(gen_sphere_walk(1, 3, 0.5, 0).is_err());
    }

    #[test]
    fn signal_shapes() {
        assert!(gen_sparse_signal(10, 0, SignalDist::Gaussian, 1).unwrap().iter().all(|v| *v == 0.0));
        let x = gen_sparse_signal(50, 7, SignalDist::PmOne, 1).unwrap();
        assert_eq!(x.iter().filter(|v| **v != 0.0).count(), 7);
        assert!(x.iter().all(|v| *v == 0.0 || v.abs() == 1.0));
        assert!(gen_sparse_signal(3, 4, SignalDist::Uniform, 1).is_err());
    }

    #[test]
    fn noiseless_instance() {
        let spec = GeneratorSpec::new(8, 12, 3, SignalDist::Uniform, 9);
        let inst = gen_instance(&spec).unwrap();
        let mut ax = vec![0.0; 8];
        inst.a.apply(&inst.x0, &mut ax);
        assert_eq!(ax, inst.b);
        assert!((inst.tau - 0.99 * inst.metadata.x0_norm1).abs() < 1e-15);
    }
}
