//! Step-size rules. The objective is quadratic along any ray, so the
//! unconstrained minimizer and the Wolfe window have closed forms.

use std::collections::VecDeque;

use crate::arc::{ArcSegment, ProjectionArc};
use crate::ball::project;
use crate::error::{LassoError, Result};
use crate::linalg::{dot, norm2_sq, norm_inf};
use crate::model::{Iterate, LassoProblem, SolverOptions};
use crate::scalar::Scalar;

/// Quantities of `f(x + αd)` needed by the analytic step rules.
#[derive(Debug, Clone)]
pub struct RaySearchData<T> {
    pub ad: Vec<T>,
    pub d_norm_sq: T,
    pub ad_norm_sq: T,
    /// `⟨g, d⟩`
    pub gd: T,
    /// Minimizer over `α ∈ ℝ`; `+∞` when the ray is flat.
    pub alpha_opt: T,
    pub flat: bool,
}

impl<T: Scalar> RaySearchData<T> {
    pub fn curvature(&self, mu: T) -> T {
        self.ad_norm_sq + mu * self.d_norm_sq
    }
}

/// `α_opt = −gᵀd / (‖Ad‖² + μ‖d‖²)`.
pub fn alpha_opt<T: Scalar>(problem: &LassoProblem<T>, it: &Iterate<T>, d: &[T]) -> Result<RaySearchData<T>> {
    problem.check_x(d)?;
    let mut ad = vec![T::zero(); problem.m()];
    problem.op.apply(d, &mut ad);
    let d_norm_sq = norm2_sq(d);
    let ad_norm_sq = norm2_sq(&ad);
    let gd = dot(&it.g, d);
    let den = ad_norm_sq + problem.mu * d_norm_sq;
    if den > T::c(1e-300) {
        Ok(RaySearchData { ad, d_norm_sq, ad_norm_sq, gd, alpha_opt: -gd / den, flat: false })
    } else if gd < T::zero() {
        Err(LassoError::UnboundedRay)
    } else {
        Ok(RaySearchData { ad, d_norm_sq, ad_norm_sq, gd, alpha_opt: T::infinity(), flat: true })
    }
}

/// `((1−γ₂)α_opt, 2(1−γ₁)α_opt)`: inside it both Wolfe conditions hold.
pub fn wolfe_window<T: Scalar>(data: &RaySearchData<T>, gamma1: T, gamma2: T) -> Result<(T, T)> {
    if !(data.gd < T::zero()) {
        return Err(LassoError::NotDescent);
    }
    if data.flat || !(data.alpha_opt > T::zero()) || !data.alpha_opt.is_finite() {
        return Err(LassoError::UnboundedRay);
    }
    let one = T::one();
    Ok(((one - gamma2) * data.alpha_opt, T::c(2.0) * (one - gamma1) * data.alpha_opt))
}

/// Last `M` objective values for the nonmonotone test.
#[derive(Debug, Clone)]
pub struct HistoryBuffer<T> {
    values: VecDeque<T>,
    capacity: usize,
}

impl<T: Scalar> HistoryBuffer<T> {
    pub fn new(capacity: usize) -> Self {
        Self { values: VecDeque::with_capacity(capacity.max(1)), capacity: capacity.max(1) }
    }

    pub fn push(&mut self, f: T) {
        if self.values.len() == self.capacity {
            self.values.pop_front();
        }
        self.values.push_back(f);
    }

    /// Clears the buffer and seeds it with `f`.
    pub fn reset(&mut self, f: T) {
        self.values.clear();
        self.values.push_back(f);
    }

    pub fn max(&self) -> T {
        self.values.iter().fold(T::neg_infinity(), |m, v| m.max(*v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }
}

/// Accepted step of a projected line search.
#[derive(Debug, Clone)]
pub struct StepOutcome<T> {
    pub x: Vec<T>,
    /// `Ax − b` at the new point.
    pub r: Vec<T>,
    pub f: T,
    /// Step multiplier actually taken (`μ_bt^k α₀` or the arc parameter).
    pub alpha: T,
    pub trials: usize,
    /// `P(x − α₀g) = x`: nothing to do.
    pub stationary: bool,
}

fn armijo_ok<T: Scalar>(f_new: T, f_ref: T, gamma: T, g: &[T], x_new: &[T], x: &[T]) -> bool {
    let mut gs = T::zero();
    for i in 0..x.len() {
        gs += g[i] * (x_new[i] - x[i]);
    }
    f_new <= f_ref + gamma * gs
}

/// Backtracking along the projection curve `α ↦ P(x − αg)` with the
/// nonmonotone sufficient-decrease test.
pub fn nonmonotone_armijo_backtrack<T: Scalar>(
    problem: &LassoProblem<T>,
    it: &Iterate<T>,
    alpha0: T,
    history: &HistoryBuffer<T>,
    gamma: T,
    mu_bt: T,
    max_trials: usize,
) -> Result<StepOutcome<T>> {
    let f_ref = history.max().max(it.f_val);
    let mut alpha = alpha0;
    let mut u = vec![T::zero(); problem.n()];
    let mut r = vec![T::zero(); problem.m()];
    for k in 0..max_trials {
        for i in 0..u.len() {
            u[i] = it.x[i] - alpha * it.g[i];
        }
        let x_t = project(&u, &problem.w, problem.tau)?.x;
        if k == 0 && x_t == it.x {
            return Ok(StepOutcome {
                x: it.x.clone(),
                r: it.r.clone(),
                f: it.f_val,
                alpha: T::zero(),
                trials: 1,
                stationary: true,
            });
        }
        problem.op.apply(&x_t, &mut r);
        for (ri, bi) in r.iter_mut().zip(&problem.b) {
            *ri -= *bi;
        }
        let f_t = problem.objective_from_residual(&x_t, &r);
        if armijo_ok(f_t, f_ref, gamma, &it.g, &x_t, &it.x) {
            return Ok(StepOutcome { x: x_t, r, f: f_t, alpha, trials: k + 1, stationary: false });
        }
        alpha *= mu_bt;
    }
    Err(LassoError::LineSearch(format!("no acceptable step after {max_trials} trials")))
}

/// Spectral step `sᵀs/sᵀy` clamped to `[α_min, α_max]`; `α_max` when `sᵀy ≤ 0`.
pub fn bb_step<T: Scalar>(s: &[T], y: &[T], alpha_min: T, alpha_max: T) -> T {
    let sy = dot(s, y);
    if !(sy > T::zero()) {
        return alpha_max;
    }
    let a = norm2_sq(s) / sy;
    if a.is_nan() {
        return alpha_max;
    }
    a.min(alpha_max).max(alpha_min)
}

/// Initial step `1/‖P(x − g) − x‖∞`, clamped.
pub fn initial_step<T: Scalar>(problem: &LassoProblem<T>, it: &Iterate<T>, alpha_min: T, alpha_max: T) -> Result<T> {
    let u: Vec<T> = it.x.iter().zip(&it.g).map(|(x, g)| *x - *g).collect();
    let p = project(&u, &problem.w, problem.tau)?.x;
    let diff: Vec<T> = p.iter().zip(&it.x).map(|(a, b)| *a - *b).collect();
    let nd = norm_inf(&diff);
    if nd > T::zero() {
        Ok((T::one() / nd).min(alpha_max).max(alpha_min))
    } else {
        Ok(T::one())
    }
}

#[derive(Debug, Clone)]
pub enum FaceStep<T> {
    Accepted {
        x: Vec<T>,
        r: Vec<T>,
        alpha: T,
        /// The step stopped at `alpha_bound`; coordinates that reached zero
        /// have been set to exactly zero.
        hit_bound: bool,
    },
    Rejected,
}

/// Wolfe step along an in-face direction, capped at `alpha_bound`.
pub fn face_wolfe_search<T: Scalar>(
    problem: &LassoProblem<T>,
    it: &Iterate<T>,
    d: &[T],
    alpha_bound: T,
    options: &SolverOptions<T>,
) -> Result<FaceStep<T>> {
    let data = match alpha_opt(problem, it, d) {
        Err(LassoError::UnboundedRay) if alpha_bound.is_finite() => return Ok(FaceStep::Rejected),
        other => other?,
    };
    let (lo, hi) = wolfe_window(&data, options.wolfe_gamma1, options.wolfe_gamma2)?;
    let a = data.alpha_opt.max(lo).min(hi);
    let (alpha, hit_bound) = if a <= alpha_bound {
        (a, false)
    } else if alpha_bound >= lo && alpha_bound > T::zero() {
        (alpha_bound, true)
    } else {
        return Ok(FaceStep::Rejected);
    };
    let mut x: Vec<T> = it.x.iter().zip(d).map(|(xi, di)| *xi + alpha * *di).collect();
    let mut r: Vec<T> = it.r.iter().zip(&data.ad).map(|(ri, adi)| *ri + alpha * *adi).collect();
    if hit_bound {
        // only coordinates whose zero crossing is the bound itself; earlier
        // crossings are genuine sign changes on an interior ray
        let lo_cut = alpha * (T::one() - T::c(1e-10));
        let hi_cut = alpha * (T::one() + T::c(1e-10));
        for i in 0..x.len() {
            if x[i] != T::zero() && it.x[i] * d[i] < T::zero() && (lo_cut..=hi_cut).contains(&(-it.x[i] / d[i])) {
                problem.op.add_column(i, -x[i], &mut r);
                x[i] = T::zero();
            }
        }
    }
    Ok(FaceStep::Accepted { x, r, alpha, hit_bound })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArcMode {
    FirstLocal,
    Global,
}

/// `A s_I`, `A d_I` and `A (w∘σ)_I` for the current support, kept up to date
/// by column updates when the support changes.
struct SupportProducts<T> {
    pairs: Vec<(usize, i8)>,
    a_s: Vec<T>,
    a_d: Vec<T>,
    a_v: Vec<T>,
    valid: bool,
    updates: usize,
    max_drift: T,
}

impl<T: Scalar> SupportProducts<T> {
    fn new(m: usize) -> Self {
        Self {
            pairs: Vec::new(),
            a_s: vec![T::zero(); m],
            a_d: vec![T::zero(); m],
            a_v: vec![T::zero(); m],
            valid: false,
            updates: 0,
            max_drift: T::zero(),
        }
    }

    fn add(&mut self, problem: &LassoProblem<T>, s: &[T], d: &[T], w: &[T], (i, sg): (usize, i8), scale: T) {
        let op = &problem.op;
        op.add_column(i, scale * s[i], &mut self.a_s);
        op.add_column(i, scale * d[i], &mut self.a_d);
        op.add_column(i, scale * w[i] * T::c(sg as f64), &mut self.a_v);
    }

    fn rebuild(&mut self, problem: &LassoProblem<T>, s: &[T], d: &[T], w: &[T], pairs: &[(usize, i8)]) {
        let old = (std::mem::take(&mut self.a_s), std::mem::take(&mut self.a_d), std::mem::take(&mut self.a_v));
        let m = problem.m();
        self.a_s = vec![T::zero(); m];
        self.a_d = vec![T::zero(); m];
        self.a_v = vec![T::zero(); m];
        for &p in pairs {
            self.add(problem, s, d, w, p, T::one());
        }
        if self.valid && self.pairs == pairs {
            for (a, b) in [(&old.0, &self.a_s), (&old.1, &self.a_d), (&old.2, &self.a_v)] {
                let drift = a.iter().zip(b.iter()).fold(T::zero(), |acc, (x, y)| acc + (*x - *y) * (*x - *y));
                self.max_drift = self.max_drift.max(drift.sqrt());
            }
        }
        self.pairs = pairs.to_vec();
        self.valid = true;
        self.updates = 0;
    }

    fn switch_to(
        &mut self,
        problem: &LassoProblem<T>,
        s: &[T],
        d: &[T],
        w: &[T],
        pairs: &[(usize, i8)],
        recompute_every: usize,
    ) {
        if !self.valid {
            self.rebuild(problem, s, d, w, pairs);
            return;
        }
        if self.pairs.as_slice() == pairs {
            return;
        }
        let old = std::mem::take(&mut self.pairs);
        for p in old.iter().filter(|p| !pairs.contains(p)) {
            self.add(problem, s, d, w, *p, -T::one());
        }
        for p in pairs.iter().filter(|p| !old.contains(p)) {
            self.add(problem, s, d, w, *p, T::one());
        }
        self.pairs = pairs.to_vec();
        self.updates += 1;
        if self.updates >= recompute_every {
            self.rebuild(problem, s, d, w, pairs);
        }
    }
}

/// Result of a search along the projection arc, with diagnostics.
#[derive(Debug, Clone)]
pub struct TrajectoryOutcome<T> {
    /// `None` when the arc minimizer fails the nonmonotone test or is the
    /// starting point; the caller then backtracks instead.
    pub step: Option<StepOutcome<T>>,
    pub segments_scanned: usize,
    /// Largest difference between incrementally updated and recomputed
    /// support products seen at a scheduled recompute.
    pub max_drift: T,
}

struct SegmentQuadratic<T> {
    q0: T,
    q1: T,
    q2: T,
}

impl<T: Scalar> SegmentQuadratic<T> {
    fn value(&self, t: T) -> T {
        self.q0 + t * self.q1 + T::c(0.5) * t * t * self.q2
    }

    fn argmin(&self, len: T) -> T {
        let t = if self.q2 > T::zero() {
            -self.q1 / self.q2
        } else if self.q1 < T::zero() {
            len
        } else {
            T::zero()
        };
        if t.is_finite() {
            t.max(T::zero()).min(len)
        } else {
            T::zero()
        }
    }
}

fn segment_quadratic<T: Scalar>(problem: &LassoProblem<T>, seg: &ArcSegment<T>, s: &[T], d: &[T], w: &[T], e: &[T], h: &[T]) -> SegmentQuadratic<T> {
    let p0 = seg.point(s, d, w, seg.alpha_start);
    let v = seg.direction(d, w);
    // On a vertex the direction cancels to rounding noise; a ratio of two
    // noise terms would fake a decrease far along the piece.
    let terms = seg.support.iter().fold(T::zero(), |m, &i| m.max(d[i].abs() + (seg.lambda_slope * w[i]).abs()));
    if !seg.inside && norm_inf(&v) <= T::c(1e3) * T::epsilon() * terms {
        let mut q0 = T::zero();
        for j in 0..e.len() {
            let ej = e[j] - problem.b[j];
            q0 += ej * ej;
        }
        q0 = T::c(0.5) * q0 + T::c(0.5) * problem.mu * norm2_sq(&p0);
        if problem.has_linear_term() {
            q0 += dot(&problem.c, &p0);
        }
        return SegmentQuadratic { q0, q1: T::zero(), q2: T::zero() };
    }
    let mut q0 = T::zero();
    let mut q1 = T::zero();
    let mut q2 = T::zero();
    for j in 0..e.len() {
        let ej = e[j] - problem.b[j];
        q0 += ej * ej;
        q1 += ej * h[j];
        q2 += h[j] * h[j];
    }
    q0 *= T::c(0.5);
    let mu = problem.mu;
    if mu != T::zero() {
        q0 += T::c(0.5) * mu * norm2_sq(&p0);
        q1 += mu * dot(&p0, &v);
        q2 += mu * norm2_sq(&v);
    }
    if problem.has_linear_term() {
        q0 += dot(&problem.c, &p0);
        q1 += dot(&problem.c, &v);
    }
    SegmentQuadratic { q0, q1, q2 }
}

/// Exact minimization of `f` along the piecewise-linear projection arc
/// `t ↦ P(x + t·d)` with `d = arc.d`.
pub fn trajectory_search<T: Scalar>(
    problem: &LassoProblem<T>,
    it: &Iterate<T>,
    arc: &ProjectionArc<T>,
    mode: ArcMode,
    history: &HistoryBuffer<T>,
    options: &SolverOptions<T>,
) -> Result<TrajectoryOutcome<T>> {
    let (s, d, w) = (&arc.s, &arc.d, &arc.w);
    let m = problem.m();
    // As = r + b; Ad for the inside pieces
    let a_s_full: Vec<T> = it.r.iter().zip(&problem.b).map(|(r, b)| *r + *b).collect();
    let mut a_d_full: Option<Vec<T>> = None;
    let mut prods = SupportProducts::new(m);
    let mut e = vec![T::zero(); m];
    let mut h = vec![T::zero(); m];

    let mut best: Option<(T, T, usize)> = None;
    let mut scanned = 0;
    for (k, seg) in arc.segments.iter().enumerate() {
        scanned += 1;
        let a = seg.alpha_start;
        if seg.inside {
            let ad = a_d_full.get_or_insert_with(|| {
                let mut v = vec![T::zero(); m];
                problem.op.apply(d, &mut v);
                v
            });
            for j in 0..m {
                e[j] = a_s_full[j] + a * ad[j];
                h[j] = ad[j];
            }
        } else {
            let pairs: Vec<(usize, i8)> = seg.support.iter().copied().zip(seg.signs.iter().copied()).collect();
            prods.switch_to(problem, s, d, w, &pairs, options.recompute_every);
            let lam = seg.lambda_at(a);
            for j in 0..m {
                e[j] = prods.a_s[j] + a * prods.a_d[j] - lam * prods.a_v[j];
                h[j] = prods.a_d[j] - seg.lambda_slope * prods.a_v[j];
            }
        }
        let q = segment_quadratic(problem, seg, s, d, w, &e, &h);
        let len = seg.alpha_end - a;
        let t = q.argmin(len);
        let val = q.value(t);
        let better = best.as_ref().map_or(true, |(bv, _, _)| val < *bv);
        if better {
            best = Some((val, a + t, k));
        }
        if mode == ArcMode::FirstLocal && (t < len || !len.is_finite()) {
            break;
        }
    }
    let max_drift = prods.max_drift;
    let (_, alpha, k) = match best {
        Some(b) => b,
        None => return Ok(TrajectoryOutcome { step: None, segments_scanned: scanned, max_drift }),
    };
    if !(alpha > T::zero()) {
        return Ok(TrajectoryOutcome { step: None, segments_scanned: scanned, max_drift });
    }
    let x_new = arc.segments[k].point(s, d, w, alpha);
    let r_new = problem.residual(&x_new);
    let f_new = problem.objective_from_residual(&x_new, &r_new);
    let f_ref = history.max().max(it.f_val);
    let step = if armijo_ok(f_new, f_ref, options.armijo_gamma, &it.g, &x_new, &it.x) {
        Some(StepOutcome { x: x_new, r: r_new, f: f_new, alpha, trials: scanned, stationary: false })
    } else {
        None
    };
    Ok(TrajectoryOutcome { step, segments_scanned: scanned, max_drift })
}
