mod common;

use std::sync::Arc;

use common::*;
use lassokit::arc::enumerate_arc;
use lassokit::ball::project;
use lassokit::duality::{best_certificate, dual_gap_augmented, dual_gap_mu_zero, dual_gap_optimized};
use lassokit::linesearch::{
    alpha_opt, nonmonotone_armijo_backtrack, trajectory_search, ArcMode, HistoryBuffer,
};
use lassokit::model::{evaluate, DenseMatrix, LassoProblem, SolverOptions};
use lassokit::LassoError;
use rand::Rng;
use rand_chacha::ChaCha20Rng;

struct Case {
    a: DenseMatrix<f64>,
    b: Vec<f64>,
    w: Vec<f64>,
    c: Vec<f64>,
    mu: f64,
    tau: f64,
    p: LassoProblem<f64>,
}

fn random_case(r: &mut ChaCha20Rng, with_mu: bool, with_c: bool) -> Case {
    let m = r.gen_range(2..10);
    let n = r.gen_range(2..10);
    let a = gauss_matrix(r, m, n);
    let b = gauss_vec(r, m);
    let w = weights(r, n, 0.3, 3.0);
    let c: Vec<f64> = if with_c { gauss_vec(r, n).iter().map(|v| 0.3 * v).collect() } else { vec![0.0; n] };
    let mu = if with_mu { r.gen_range(1e-3..1.0) } else { 0.0 };
    let tau = r.gen_range(0.1..2.0);
    let p = LassoProblem::new(Arc::new(a.clone()), b.clone(), tau)
        .unwrap()
        .with_weights(w.clone())
        .unwrap()
        .with_mu(mu)
        .unwrap()
        .with_linear_term(c.clone())
        .unwrap();
    Case { a, b, w, c, mu, tau, p }
}

#[test]
fn dual_objectives_are_lower_bounds() {
    let mut r = rng(41);
    for t in 0..150 {
        let case = random_case(&mut r, t % 2 == 1, t % 3 == 0);
        let (_, f_star) = qp_oracle(&case.a, &case.b, &case.w, case.tau, case.mu, &case.c, 200_000);
        let tol = 1e-9 * (1.0 + f_star.abs());
        for _ in 0..5 {
            let x = project(&gauss_vec(&mut r, case.p.n()), &case.w, case.tau).unwrap().x;
            let it = evaluate(&case.p, &x).unwrap();
            let mut duals = Vec::new();
            if case.mu == 0.0 {
                duals.push(dual_gap_mu_zero(&case.p, &it).unwrap());
                assert!(matches!(dual_gap_optimized(&case.p, &it), Err(LassoError::WrongFormulation(_))));
            } else {
                duals.push(dual_gap_augmented(&case.p, &it).unwrap());
                duals.push(dual_gap_optimized(&case.p, &it).unwrap());
                assert!(matches!(dual_gap_mu_zero(&case.p, &it), Err(LassoError::WrongFormulation(_))));
            }
            for (cert, gap) in duals {
                assert!(cert.dual_obj <= f_star + tol, "{:?}: {} > {}", cert.formulation, cert.dual_obj, f_star);
                assert!(gap >= 0.0);
            }
        }
    }
}

#[test]
fn certificate_closes_at_the_optimum() {
    let mut r = rng(42);
    for t in 0..60 {
        let case = random_case(&mut r, t % 2 == 1, t % 3 == 0);
        let (x, f_star) = qp_oracle(&case.a, &case.b, &case.w, case.tau, case.mu, &case.c, 1_000_000);
        let it = evaluate(&case.p, &x).unwrap();
        let (cert, gap) = best_certificate(&case.p, &it);
        assert!(gap <= 1e-6, "gap {gap}");
        assert!((f_star - cert.dual_obj) <= 1e-6 * f_star.abs().max(1e-3));
    }
}

#[test]
fn alpha_opt_minimizes_along_the_ray() {
    let mut r = rng(43);
    for t in 0..300 {
        let case = random_case(&mut r, t % 2 == 1, t % 3 == 0);
        let x = gauss_vec(&mut r, case.p.n());
        let d = gauss_vec(&mut r, case.p.n());
        let wide = case.p.with_tau(1e6).unwrap();
        let it = evaluate(&wide, &x).unwrap();
        let data = alpha_opt(&wide, &it, &d).unwrap();
        let f = |alpha: f64| {
            let y: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + alpha * b).collect();
            objective_direct(&case.a, &case.b, case.mu, &case.c, &y)
        };
        let f_opt = f(data.alpha_opt);
        let span = 2.0 * data.alpha_opt.abs() + 1.0;
        for k in 0..=400 {
            let alpha = data.alpha_opt - span + 2.0 * span * k as f64 / 400.0;
            assert!(f_opt <= f(alpha) + 1e-10 * (1.0 + f_opt.abs()));
        }
    }
}

#[test]
fn backtracking_meets_the_nonmonotone_test() {
    let mut r = rng(44);
    for t in 0..300 {
        let case = random_case(&mut r, t % 2 == 1, t % 3 == 0);
        let x = project(&gauss_vec(&mut r, case.p.n()), &case.w, case.tau).unwrap().x;
        let it = evaluate(&case.p, &x).unwrap();
        let mut hist = HistoryBuffer::new(5);
        hist.push(it.f_val);
        for _ in 0..r.gen_range(0..4) {
            hist.push(it.f_val + r.gen_range(0.0..1.0));
        }
        let step = nonmonotone_armijo_backtrack(&case.p, &it, r.gen_range(0.1..100.0), &hist, 1e-4, 0.5, 60).unwrap();
        if step.stationary {
            continue;
        }
        let gs: f64 = it.g.iter().zip(&step.x).zip(&x).map(|((g, a), b)| g * (a - b)).sum();
        assert!(step.f <= hist.max().max(it.f_val) + 1e-4 * gs + 1e-12);
        assert!(wl1(&step.x, &case.w) <= case.tau * (1.0 + 1e-12));
        let f_direct = objective_direct(&case.a, &case.b, case.mu, &case.c, &step.x);
        assert!((step.f - f_direct).abs() <= 1e-10 * (1.0 + f_direct.abs()));
    }
}

#[test]
fn global_arc_search_beats_dense_sampling() {
    let mut r = rng(45);
    let opts = SolverOptions::<f64>::default();
    let mut found = 0;
    for t in 0..200 {
        let case = random_case(&mut r, t % 2 == 1, t % 3 == 0);
        let x = project(&gauss_vec(&mut r, case.p.n()), &case.w, case.tau).unwrap().x;
        let it = evaluate(&case.p, &x).unwrap();
        let d: Vec<f64> = it.g.iter().map(|g| -g).collect();
        let arc = enumerate_arc(&x, &d, &case.w, case.tau);
        let mut hist = HistoryBuffer::new(1);
        hist.push(it.f_val);
        let out = trajectory_search(&case.p, &it, &arc, ArcMode::Global, &hist, &opts).unwrap();
        let Some(step) = out.step else { continue };
        found += 1;
        let last = arc.segments.last().unwrap().alpha_start;
        let top = 2.0 * last + 1.0;
        for k in 0..=2000 {
            let alpha = top * k as f64 / 2000.0;
            let p = arc.point_at(alpha).unwrap();
            let fp = objective_direct(&case.a, &case.b, case.mu, &case.c, &p);
            assert!(step.f <= fp + 1e-9 * (1.0 + fp.abs()), "case {t}: arc min {} at {} > sample {fp} at {alpha}", step.f, step.alpha);
        }
        let local = trajectory_search(&case.p, &it, &arc, ArcMode::FirstLocal, &hist, &opts).unwrap();
        if let Some(l) = local.step {
            assert!(l.f >= step.f - 1e-12 * (1.0 + step.f.abs()));
            assert!(l.f <= it.f_val);
        }
    }
    assert!(found > 100);
}
