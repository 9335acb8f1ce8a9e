mod common;

use common::*;
use lassokit::ball::FaceId;
use lassokit::facebasis::{FaceBasis, ReducedBasis};
use lassokit::lbfgs::{lbfgs_direction, LbfgsModel};
use proptest::prelude::*;
use rand::Rng;

/// Column `j` of the dense basis on the support: `(W_j e_j − w_j w_{<j}) / √(W_j W_{j+1})`.
fn dense_column(ws: &[f64], j: usize) -> Vec<f64> {
    let wj: f64 = ws[..j].iter().map(|v| v * v).sum();
    let wj1 = wj + ws[j] * ws[j];
    let norm = (wj * wj1).sqrt();
    let mut col = vec![0.0; ws.len()];
    for p in 0..j {
        col[p] = -ws[j] * ws[p] / norm;
    }
    col[j] = wj / norm;
    col
}

proptest! {
    #[test]
    fn basis_matches_dense_closed_form(n in 2usize..40, seed in 0u64..10_000) {
        let mut r = rng(seed);
        let w = weights(&mut r, n, 0.1, 10.0);
        let mut signs = vec![0i8; n];
        let k = r.gen_range(2..=n);
        for i in rand::seq::index::sample(&mut r, n, k) {
            signs[i] = if r.gen::<bool>() { 1 } else { -1 };
        }
        let face = FaceId::Proper { signs: signs.clone() };
        let basis = FaceBasis::new(&face, &w).unwrap();
        let support = face.support();
        prop_assert_eq!(basis.dim(), k - 1);
        let ws: Vec<f64> = support.iter().map(|&i| w[i]).collect();
        for j in 1..k {
            let mut e = vec![0.0; k - 1];
            e[j - 1] = 1.0;
            let got = basis.apply(&e).unwrap();
            let want = dense_column(&ws, j);
            for (p, &i) in support.iter().enumerate() {
                prop_assert!((got[i] - signs[i] as f64 * want[p]).abs() <= 1e-12);
            }
            for i in (0..n).filter(|i| signs[*i] == 0) {
                prop_assert_eq!(got[i], 0.0);
            }
        }
        // adjoint consistency
        let v = gauss_vec(&mut r, k - 1);
        let z = gauss_vec(&mut r, n);
        let lhs: f64 = basis.apply(&v).unwrap().iter().zip(&z).map(|(a, b)| a * b).sum();
        let rhs: f64 = basis.apply_adjoint(&z).unwrap().iter().zip(&v).map(|(a, b)| a * b).sum();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
    }

    #[test]
    fn basis_directions_keep_the_weighted_norm(n in 2usize..30, seed in 0u64..10_000) {
        // Φv is orthogonal to the signed weights, so moving along it keeps Σ w|x| on the face.
        let mut r = rng(seed);
        let w = weights(&mut r, n, 0.1, 10.0);
        let signs: Vec<i8> = (0..n).map(|_| if r.gen::<bool>() { 1 } else { -1 }).collect();
        let basis = FaceBasis::new(&FaceId::Proper { signs: signs.clone() }, &w).unwrap();
        let v = gauss_vec(&mut r, n - 1);
        let d = basis.apply(&v).unwrap();
        let ip: f64 = d.iter().zip(&w).zip(&signs).map(|((di, wi), si)| di * wi * *si as f64).sum();
        prop_assert!(ip.abs() <= 1e-10 * (1.0 + w.iter().fold(0.0f64, |m, v| m.max(*v))));
    }
}

#[test]
fn basis_rejects_small_faces() {
    assert!(FaceBasis::new(&FaceId::Interior, &[1.0f64, 1.0]).is_err());
    assert!(FaceBasis::new(&FaceId::Proper { signs: vec![1, 0] }, &[1.0f64, 1.0]).is_err());
    assert!(FaceBasis::new(&FaceId::Proper { signs: vec![1, -1] }, &[1.0f64, 1.0]).is_ok());
}

#[test]
fn lbfgs_matches_dense_recursion() {
    let mut r = rng(31);
    for _ in 0..200 {
        let k = r.gen_range(1..12);
        let memory = r.gen_range(1..8);
        let h0 = r.gen_range(0.1..5.0);
        let mut model = LbfgsModel::new(ReducedBasis::<f64>::Identity(k), h0, memory);
        let mut accepted = Vec::new();
        let g = gauss_matrix(&mut r, k, k);
        for _ in 0..r.gen_range(0..12) {
            let s = gauss_vec(&mut r, k);
            // y = (GᵀG + I)s keeps sᵀy > 0
            let gs = matvec(&g, &s);
            let mut y = vec![0.0; k];
            for j in 0..k {
                y[j] = s[j] + (0..k).map(|i| g.get(i, j) * gs[i]).sum::<f64>();
            }
            if model.update(s.clone(), y.clone()) {
                accepted.push((s, y));
            }
        }
        let keep = accepted.len().saturating_sub(memory);
        let h = dense_bfgs(h0, &accepted[keep..], k);
        let v = gauss_vec(&mut r, k);
        let got = model.apply_inverse_hessian(&v);
        for i in 0..k {
            let want: f64 = (0..k).map(|j| h[i][j] * v[j]).sum();
            assert!((got[i] - want).abs() <= 1e-9 * (1.0 + want.abs()), "{got:?} vs row {i} {want}");
        }
    }
}

#[test]
fn conjugate_pairs_reproduce_newton_step() {
    let mut r = rng(32);
    for _ in 0..50 {
        let k = r.gen_range(1..10);
        let b = gauss_matrix(&mut r, k, k);
        let mut hess = vec![vec![0.0; k]; k];
        for i in 0..k {
            for j in 0..k {
                hess[i][j] = (0..k).map(|l| b.get(l, i) * b.get(l, j)).sum::<f64>() + if i == j { 0.5 } else { 0.0 };
            }
        }
        let hv = |v: &[f64]| -> Vec<f64> { (0..k).map(|i| (0..k).map(|j| hess[i][j] * v[j]).sum()).collect() };
        // Hessian-conjugate steps by Gram–Schmidt in the Hessian inner product
        let mut steps: Vec<Vec<f64>> = Vec::new();
        for _ in 0..k {
            let mut s = gauss_vec(&mut r, k);
            for p in &steps {
                let hp = hv(p);
                let c = s.iter().zip(&hp).map(|(a, b)| a * b).sum::<f64>() / p.iter().zip(&hp).map(|(a, b)| a * b).sum::<f64>();
                for (si, pi) in s.iter_mut().zip(p) {
                    *si -= c * pi;
                }
            }
            steps.push(s);
        }
        let mut model = LbfgsModel::new(ReducedBasis::<f64>::Identity(k), 1.0, k);
        for s in &steps {
            assert!(model.update(s.clone(), hv(s)));
        }
        let g = gauss_vec(&mut r, k);
        let d = lbfgs_direction(&model, &g);
        let newton = solve_dense(hess.clone(), g.iter().map(|v| -v).collect()).unwrap();
        for (a, b) in d.iter().zip(&newton) {
            assert!((a - b).abs() <= 1e-7 * (1.0 + b.abs()), "{d:?} vs {newton:?}");
        }
    }
}

#[test]
fn curvature_guard_rejects_bad_pairs() {
    let mut model = LbfgsModel::new(ReducedBasis::<f64>::Identity(2), 1.0, 3);
    assert!(!model.update(vec![1.0, 0.0], vec![-1.0, 0.0]));
    assert!(!model.update(vec![1.0, 0.0], vec![0.0, 1.0]));
    assert!(model.is_empty());
    assert_eq!(model.skipped(), 2);
    assert_eq!(model.apply_inverse_hessian(&[2.0, 4.0]), vec![2.0, 4.0]);
}
