//! Lines whose projection onto the ball visits the maximum number of faces,
//! `4n − 1`, i.e. `4n − 2` breakpoints.
//!
//! Each construction is described by curves `v_i(α) = |o_i − αd_i| / w_i`
//! with zero crossing `z_i` and slope `s_i = d_i / w_i`. The returned line is
//! `x(α) = o − αd`, written as `start + α·direction`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct LineInstance<T> {
    pub start: Vec<T>,
    pub direction: Vec<T>,
    pub w: Vec<T>,
    pub tau: T,
}

/// Radius for the four-dimensional canonical instance. A scan over `τ` shows
/// 14 breakpoints for every `τ` in roughly `[0.948, 1.054]`; this is the
/// middle of that window.
pub const FOUR_DIM_TAU: f64 = 1.0;

fn from_curves<T: Scalar>(z: &[f64], slope: &[f64], w: &[f64], tau: f64) -> LineInstance<T> {
    let d: Vec<f64> = slope.iter().zip(w).map(|(s, w)| s * w).collect();
    let o: Vec<f64> = z.iter().zip(&d).map(|(z, d)| z * d).collect();
    LineInstance {
        start: o.iter().map(|v| T::c(*v)).collect(),
        direction: d.iter().map(|v| T::c(-*v)).collect(),
        w: w.iter().map(|v| T::c(*v)).collect(),
        tau: T::c(tau),
    }
}

/// `Σ_i w_i² s_i |α − z_i|`, the weighted norm of `x(α)`.
fn norm_at(z: &[f64], slope: &[f64], w: &[f64], alpha: f64) -> f64 {
    (0..z.len()).map(|i| w[i] * w[i] * slope[i] * (alpha - z[i]).abs()).sum()
}

/// Canonical-ball instance in three dimensions.
pub fn three_dim<T: Scalar>() -> LineInstance<T> {
    let z = [-4.0, 0.0, 4.0];
    let slope = [1.0, 0.5, 1.0 - 1e-3];
    let w = [1.0; 3];
    let tau = norm_at(&z, &slope, &w, 3.0);
    from_curves(&z, &slope, &w, tau)
}

/// Canonical-ball instance in four dimensions.
pub fn four_dim<T: Scalar>() -> LineInstance<T> {
    let z = [0.00, 0.21, 0.44, 0.86];
    let slope = [1.02, 0.52, 0.80, 1.01];
    from_curves(&z, &slope, &[1.0; 4], FOUR_DIM_TAU)
}

/// Weighted-ball instance for `n ≥ 2`: one heavy curve at zero, the steepest
/// curve at three and a bundle of `n − 2` curves near two.
pub fn weighted<T: Scalar>(n: usize, seed: u64) -> LineInstance<T> {
    assert!(n >= 2);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let omega = ((2 * n + 5) as f64).sqrt();
    let mut z = vec![0.0, 3.0];
    let mut slope = vec![1.0, 4.0];
    let mut w = vec![omega, 1.0];
    for _ in 2..n {
        z.push(rng.gen_range(1.9..2.0));
        slope.push(2.0);
        w.push(1.0);
    }
    // λ(1) = 0 is a breakpoint
    let tau = norm_at(&z, &slope, &w, 1.0);
    from_curves(&z, &slope, &w, tau)
}

/// Canonical-ball instance for `n ≥ 5`: two outer curves at `∓μ₂`, bundles
/// around `∓μ₁` and a central curve at zero.
pub fn canonical<T: Scalar>(n: usize, seed: u64) -> LineInstance<T> {
    assert!(n >= 5);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let beta = 0.5;
    let nf = n as f64;
    let mu1 = 10.0 * beta;
    let mu2 = mu1 + 2.0 * beta;
    let delta = beta / nf;
    let sigma = delta / 2.0;
    let eps = (delta / (2.0 * mu1)).min(0.125);
    let k1 = (n - 3) / 2;
    let k2 = (n - 3).div_ceil(2);
    let mut z = vec![-mu2, mu2, 0.0];
    let mut slope = vec![4.0, 4.0 - eps, 1.0];
    for _ in 0..k1 {
        z.push(-mu1 + rng.gen_range(-sigma..sigma));
        slope.push(2.0);
    }
    for _ in 0..k2 {
        z.push(mu1 + rng.gen_range(-sigma..sigma));
        slope.push(2.0 * k1 as f64 / k2 as f64);
    }
    let w = vec![1.0; n];
    let tau = norm_at(&z, &slope, &w, -mu1 + delta);
    from_curves(&z, &slope, &w, tau)
}

/// A line attaining `4n − 2` breakpoints.
///
/// `n = 1` is a plain segment through the ball, `n = 2` the weighted
/// construction, `n = 3, 4` the explicit canonical instances and `n ≥ 5` the
/// bundle construction with a fixed seed.
pub fn extremal_construction<T: Scalar>(n: usize) -> LineInstance<T> {
    match n {
        0 => panic!("dimension must be at least one"),
        1 => from_curves(&[0.0], &[1.0], &[1.0], 1.0),
        2 => weighted(2, 0),
        3 => three_dim(),
        4 => four_dim(),
        _ => canonical(n, n as u64),
    }
}
