//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use lassokit::model::{DenseMatrix, LassoProblem, LinearOperator};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn gauss_vec(r: &mut ChaCha20Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| r.sample(StandardNormal)).collect()
}

pub fn gauss_matrix(r: &mut ChaCha20Rng, m: usize, n: usize) -> DenseMatrix<f64> {
    DenseMatrix::from_fn(m, n, |_, _| r.sample(StandardNormal))
}

pub fn weights(r: &mut ChaCha20Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| r.gen_range(lo..hi)).collect()
}

pub fn wl1(x: &[f64], w: &[f64]) -> f64 {
    x.iter().zip(w).map(|(a, b)| a.abs() * b).sum()
}

/// Projection onto `{Σ w|x| ≤ τ}` by bisection on the soft-threshold level.
pub fn project_bisect(u: &[f64], w: &[f64], tau: f64) -> Vec<f64> {
    let shrink = |lam: f64| -> Vec<f64> {
        u.iter().zip(w).map(|(ui, wi)| ui.signum() * (ui.abs() - lam * wi).max(0.0)).collect()
    };
    if wl1(u, w) <= tau {
        return u.to_vec();
    }
    let mut lo = 0.0;
    let mut hi = u.iter().zip(w).map(|(a, b)| a.abs() / b).fold(0.0, f64::max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if wl1(&shrink(mid), w) > tau {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    shrink(hi)
}

/// Dense column-major objective `½‖Ax − b‖² + (μ/2)‖x‖² + cᵀx`, written
/// without the library's kernels.
pub fn objective_direct(a: &DenseMatrix<f64>, b: &[f64], mu: f64, c: &[f64], x: &[f64]) -> f64 {
    let (m, n) = (a.nrows(), a.ncols());
    let mut f = 0.0;
    for i in 0..m {
        let mut s = -b[i];
        for j in 0..n {
            s += a.get(i, j) * x[j];
        }
        f += 0.5 * s * s;
    }
    for j in 0..n {
        f += 0.5 * mu * x[j] * x[j] + c.get(j).copied().unwrap_or(0.0) * x[j];
    }
    f
}

pub fn gradient_direct(a: &DenseMatrix<f64>, b: &[f64], mu: f64, c: &[f64], x: &[f64]) -> Vec<f64> {
    let (m, n) = (a.nrows(), a.ncols());
    let mut r = vec![0.0; m];
    for i in 0..m {
        r[i] = -b[i];
        for j in 0..n {
            r[i] += a.get(i, j) * x[j];
        }
    }
    (0..n)
        .map(|j| {
            let mut g = mu * x[j] + c.get(j).copied().unwrap_or(0.0);
            for i in 0..m {
                g += a.get(i, j) * r[i];
            }
            g
        })
        .collect()
}

/// FISTA with function-value restarts and the bisection projection; returns
/// the best objective found.
pub fn qp_oracle(a: &DenseMatrix<f64>, b: &[f64], w: &[f64], tau: f64, mu: f64, c: &[f64], max_iter: usize) -> (Vec<f64>, f64) {
    let n = a.ncols();
    let step = 1.0 / (spectral_sq(a) * 1.01 + mu + 1e-12);
    let mut x = vec![0.0; n];
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut f_prev = objective_direct(a, b, mu, c, &x);
    let mut best = (x.clone(), f_prev);
    let mut still = 0;
    for k in 0..max_iter {
        if k % 50 == 0 && stationary(a, b, w, tau, mu, c, &x, step) {
            break;
        }
        let g = gradient_direct(a, b, mu, c, &y);
        let u: Vec<f64> = y.iter().zip(&g).map(|(yi, gi)| yi - step * gi).collect();
        let x_new = project_bisect(&u, w, tau);
        let f_new = objective_direct(a, b, mu, c, &x_new);
        if f_new < best.1 {
            best = (x_new.clone(), f_new);
        }
        let moved = x_new.iter().zip(&x).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
        if f_new > f_prev && t > 1.0 {
            // restart momentum
            t = 1.0;
            y = x.clone();
            continue;
        }
        let t_new = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        y = x_new.iter().zip(&x).map(|(p, q)| p + (t - 1.0) / t_new * (p - q)).collect();
        x = x_new;
        t = t_new;
        f_prev = f_new;
        if moved < 1e-15 {
            still += 1;
            if still > 20 {
                break;
            }
        } else {
            still = 0;
        }
    }
    best
}

/// Projected-gradient fixed-point test `‖x − P(x − s∇f)‖∞ ≤ 1e-12 s (1 + ‖∇f‖∞)`.
fn stationary(a: &DenseMatrix<f64>, b: &[f64], w: &[f64], tau: f64, mu: f64, c: &[f64], x: &[f64], step: f64) -> bool {
    let g = gradient_direct(a, b, mu, c, x);
    let u: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - step * gi).collect();
    let p = project_bisect(&u, w, tau);
    let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let res = p.iter().zip(x).fold(0.0f64, |m, (pi, xi)| m.max((pi - xi).abs()));
    res <= 1e-12 * step * (1.0 + gmax)
}

/// `‖A‖₂²` by power iteration on `AᵀA`.
pub fn spectral_sq(a: &DenseMatrix<f64>) -> f64 {
    let (m, n) = (a.nrows(), a.ncols());
    let mut v = vec![1.0; n];
    let mut est = 0.0;
    for _ in 0..500 {
        let mut av = vec![0.0; m];
        a.apply(&v, &mut av);
        let mut atav = vec![0.0; n];
        a.apply_adjoint(&av, &mut atav);
        let norm = atav.iter().map(|t| t * t).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        est = norm / v.iter().map(|t| t * t).sum::<f64>().sqrt();
        v = atav.iter().map(|t| t / norm).collect();
    }
    est
}

pub fn problem(a: DenseMatrix<f64>, b: Vec<f64>, tau: f64) -> LassoProblem<f64> {
    LassoProblem::new(Arc::new(a), b, tau).unwrap()
}

/// `A x` with explicit loops.
pub fn matvec(a: &DenseMatrix<f64>, x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.nrows()];
    a.apply(x, &mut out);
    out
}

/// Dense inverse-Hessian BFGS recursion `H₊ = (I − ρsyᵀ) H (I − ρysᵀ) + ρssᵀ`.
pub fn dense_bfgs(h0: f64, pairs: &[(Vec<f64>, Vec<f64>)], k: usize) -> Vec<Vec<f64>> {
    let mut h = vec![vec![0.0; k]; k];
    for (i, row) in h.iter_mut().enumerate() {
        row[i] = h0;
    }
    for (s, y) in pairs {
        let rho = 1.0 / s.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
        let mut left = vec![vec![0.0; k]; k];
        for i in 0..k {
            for j in 0..k {
                left[i][j] = if i == j { 1.0 } else { 0.0 } - rho * s[i] * y[j];
            }
        }
        let mul = |a: &Vec<Vec<f64>>, b: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            let mut c = vec![vec![0.0; k]; k];
            for i in 0..k {
                for l in 0..k {
                    for j in 0..k {
                        c[i][j] += a[i][l] * b[l][j];
                    }
                }
            }
            c
        };
        let mut right = vec![vec![0.0; k]; k];
        for i in 0..k {
            for j in 0..k {
                right[i][j] = left[j][i];
            }
        }
        h = mul(&mul(&left, &h), &right);
        for i in 0..k {
            for j in 0..k {
                h[i][j] += rho * s[i] * s[j];
            }
        }
    }
    h
}

/// Solves `M x = v` by Gaussian elimination with partial pivoting.
pub fn solve_dense(mut m: Vec<Vec<f64>>, mut v: Vec<f64>) -> Option<Vec<f64>> {
    let n = v.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())?;
        if m[piv][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, piv);
        v.swap(col, piv);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for k in col..n {
                m[row][k] -= f * m[col][k];
            }
            v[row] -= f * v[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = v[row];
        for k in row + 1..n {
            s -= m[row][k] * x[k];
        }
        x[row] = s / m[row][row];
    }
    Some(x)
}
