//! The projection arc `p(α) = P(s + αd)` onto the weighted one-norm ball.
//!
//! `p` is piecewise linear. On a piece where `s + αd` lies outside the ball
//! the projection is a soft threshold with `λ(α)` affine and a fixed support
//! and sign pattern; on a piece inside the ball `p(α) = s + αd`. The
//! enumerator walks the events that separate pieces: coordinates crossing
//! zero, coordinates entering or leaving the support, and the path entering
//! or leaving the ball.

pub mod extremal;

use crate::ball::project;
use crate::error::{LassoError, Result};
use crate::linalg::weighted_l1;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArcEventKind {
    ZeroCross,
    SupportRemove,
    SupportAdd,
    BoundaryCross,
}

#[derive(Debug, Clone)]
pub struct ArcEvent<T> {
    pub alpha: T,
    pub kind: ArcEventKind,
    pub indices: Vec<usize>,
    /// Threshold at the event.
    pub lambda_after: T,
    /// `‖s + αd‖_{w,1}` at the event.
    pub kappa_after: T,
    /// Right derivative of `κ` after the event.
    pub rho_after: T,
    /// Slope of `λ` on the following piece.
    pub mu_after: T,
}

/// A maximal piece of the arc on which the face of `p(α)` is constant.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcSegment<T> {
    pub alpha_start: T,
    /// May be infinite for the last piece.
    pub alpha_end: T,
    /// `s + αd` lies in the ball on this piece, so `λ ≡ 0` and `p = s + αd`.
    pub inside: bool,
    /// Support of `p` (ascending); empty when `inside`.
    pub support: Vec<usize>,
    /// Signs of `p` on `support`.
    pub signs: Vec<i8>,
    /// `λ(α) = lambda_intercept + lambda_slope·α` on this piece.
    pub lambda_intercept: T,
    pub lambda_slope: T,
}

impl<T: Scalar> ArcSegment<T> {
    pub fn contains(&self, alpha: T) -> bool {
        alpha >= self.alpha_start && alpha <= self.alpha_end
    }

    pub fn lambda_at(&self, alpha: T) -> T {
        if self.inside {
            T::zero()
        } else {
            (self.lambda_intercept + self.lambda_slope * alpha).max(T::zero())
        }
    }

    /// Closed-form `p(α)` for `α` on this piece.
    pub fn point(&self, s: &[T], d: &[T], w: &[T], alpha: T) -> Vec<T> {
        if self.inside {
            return s.iter().zip(d).map(|(si, di)| *si + alpha * *di).collect();
        }
        let lam = self.lambda_at(alpha);
        let mut p = vec![T::zero(); s.len()];
        for (&i, &sg) in self.support.iter().zip(&self.signs) {
            let sg = T::c(sg as f64);
            p[i] = s[i] + alpha * d[i] - lam * w[i] * sg;
        }
        p
    }

    /// Derivative of `p` along the piece.
    pub fn direction(&self, d: &[T], w: &[T]) -> Vec<T> {
        if self.inside {
            return d.to_vec();
        }
        let mut v = vec![T::zero(); d.len()];
        for (&i, &sg) in self.support.iter().zip(&self.signs) {
            v[i] = d[i] - self.lambda_slope * w[i] * T::c(sg as f64);
        }
        v
    }

    fn same_face(&self, other: &Self) -> bool {
        self.inside == other.inside && self.support == other.support && self.signs == other.signs
    }
}

/// The enumerated arc for `α ≥ 0`.
#[derive(Debug, Clone)]
pub struct ProjectionArc<T> {
    pub s: Vec<T>,
    pub d: Vec<T>,
    pub w: Vec<T>,
    pub tau: T,
    pub segments: Vec<ArcSegment<T>>,
    pub events: Vec<ArcEvent<T>>,
}

impl<T: Scalar> ProjectionArc<T> {
    pub fn segment_index(&self, alpha: T) -> Result<usize> {
        if !(alpha >= T::zero()) {
            return Err(LassoError::InvalidParameter("alpha outside the enumerated range".into()));
        }
        let k = self.segments.partition_point(|seg| seg.alpha_end < alpha);
        if k >= self.segments.len() {
            return Err(LassoError::InvalidParameter("alpha outside the enumerated range".into()));
        }
        Ok(k)
    }

    pub fn lambda_at(&self, alpha: T) -> Result<T> {
        let k = self.segment_index(alpha)?;
        if self.tau == T::zero() {
            return Ok(zero_radius_lambda(&self.s, &self.d, &self.w, alpha));
        }
        Ok(self.segments[k].lambda_at(alpha))
    }

    pub fn point_at(&self, alpha: T) -> Result<Vec<T>> {
        let k = self.segment_index(alpha)?;
        Ok(self.segments[k].point(&self.s, &self.d, &self.w, alpha))
    }

    /// Number of face changes along the ray.
    pub fn breakpoint_count(&self) -> usize {
        self.segments.len().saturating_sub(1)
    }
}

fn zero_radius_lambda<T: Scalar>(s: &[T], d: &[T], w: &[T], alpha: T) -> T {
    let mut m = T::zero();
    for i in 0..s.len() {
        m = m.max((s[i] + alpha * d[i]).abs() / w[i]);
    }
    m
}

/// `λ(α)` on an enumerated arc.
pub fn lambda_of_alpha<T: Scalar>(arc: &ProjectionArc<T>, alpha: T) -> Result<T> {
    arc.lambda_at(alpha)
}

/// Resolves which tied candidates belong to the support just after an event.
///
/// `base` are indices that certainly stay, `candidates` are tied indices and
/// `r` holds the right derivatives of `|x_i(α)|`. Candidates are taken in
/// decreasing order of `r_j / w_j` while that ratio exceeds the running slope
/// `Σ w_i r_i / Σ w_i²`. When `base` is empty the leading candidate always
/// enters. Returns the new support in ascending order.
pub fn support_addition_filter<T: Scalar>(
    base: &[usize],
    candidates: &[usize],
    r: &[T],
    w: &[T],
) -> Vec<usize> {
    let mut a = T::zero();
    let mut b = T::zero();
    for &i in base {
        a += w[i] * r[i];
        b += w[i] * w[i];
    }
    let mut order: Vec<usize> = candidates.to_vec();
    order.sort_by(|&i, &j| {
        let qi = r[i] / w[i];
        let qj = r[j] / w[j];
        qj.partial_cmp(&qi).unwrap_or(std::cmp::Ordering::Equal).then(i.cmp(&j))
    });
    let mut out: Vec<usize> = base.to_vec();
    for j in order {
        let q = r[j] / w[j];
        if b == T::zero() || q * b > a {
            a += w[j] * r[j];
            b += w[j] * w[j];
            out.push(j);
        } else {
            break;
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

#[derive(Debug, Clone)]
struct State<T> {
    inside: bool,
    support: Vec<usize>,
    signs: Vec<i8>,
    c0: T,
    slope: T,
}

impl<T: Scalar> State<T> {
    fn inside() -> Self {
        Self { inside: true, support: Vec::new(), signs: Vec::new(), c0: T::zero(), slope: T::zero() }
    }

    fn outside(support: Vec<usize>, x: &[T], s: &[T], d: &[T], w: &[T], tau: T) -> Self {
        let signs: Vec<i8> = support
            .iter()
            .map(|&i| {
                let v = if x[i] != T::zero() { x[i] } else { d[i] };
                if v >= T::zero() {
                    1
                } else {
                    -1
                }
            })
            .collect();
        let (mut a0, mut a1, mut bb) = (T::zero(), T::zero(), T::zero());
        for (&i, &sg) in support.iter().zip(&signs) {
            let sg = T::c(sg as f64);
            a0 += w[i] * sg * s[i];
            a1 += w[i] * sg * d[i];
            bb += w[i] * w[i];
        }
        let (c0, slope) = if bb > T::zero() { ((a0 - tau) / bb, a1 / bb) } else { (T::zero(), T::zero()) };
        Self { inside: false, support, signs, c0, slope }
    }

    fn lambda(&self, alpha: T) -> T {
        if self.inside {
            T::zero()
        } else {
            (self.c0 + self.slope * alpha).max(T::zero())
        }
    }

    fn segment(&self, start: T, end: T) -> ArcSegment<T> {
        ArcSegment {
            alpha_start: start,
            alpha_end: end,
            inside: self.inside,
            support: self.support.clone(),
            signs: self.signs.clone(),
            lambda_intercept: self.c0,
            lambda_slope: self.slope,
        }
    }
}

/// Enumerates all pieces of `P(s + αd)` for `α ≥ 0`.
pub fn enumerate_arc<T: Scalar>(s: &[T], d: &[T], w: &[T], tau: T) -> ProjectionArc<T> {
    let n = s.len();
    let zero = T::zero();
    let two = T::c(2.0);
    let ftol = T::feas_tol();
    let mut arc = ProjectionArc {
        s: s.to_vec(),
        d: d.to_vec(),
        w: w.to_vec(),
        tau,
        segments: Vec::new(),
        events: Vec::new(),
    };

    // Right derivative of |s_i + αd_i| and the sorted zero crossings.
    let mut r: Vec<T> = (0..n)
        .map(|i| if s[i] * d[i] < zero { -d[i].abs() } else { d[i].abs() })
        .collect();
    let mut crossings: Vec<(T, usize)> =
        (0..n).filter(|&i| s[i] * d[i] < zero).map(|i| (-s[i] / d[i], i)).collect();
    crossings.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal).then(a.1.cmp(&b.1)));
    let mut rho: T = (0..n).map(|i| w[i] * r[i]).sum();

    if tau == zero {
        let st = State { inside: false, support: Vec::new(), signs: Vec::new(), c0: zero, slope: zero };
        arc.segments.push(st.segment(zero, T::infinity()));
        return arc;
    }

    // Initial state.
    let kappa0 = weighted_l1(s, w);
    let mut state = if kappa0 < tau * (T::one() - ftol) {
        State::inside()
    } else if kappa0 <= tau * (T::one() + ftol) {
        if rho <= zero {
            State::inside()
        } else {
            boundary_exit(s, s, d, w, &r, tau)
        }
    } else {
        let lam0 = project(s, w, tau).map(|p| p.lambda).unwrap_or(zero);
        let tie = T::c(1e-12);
        let mut base = Vec::new();
        let mut cands = Vec::new();
        for i in 0..n {
            let a = s[i].abs();
            let t = lam0 * w[i];
            if (a - t).abs() <= tie * a.max(t) && a > zero {
                cands.push(i);
            } else if a > t {
                base.push(i);
            }
        }
        let sup = support_addition_filter(&base, &cands, &r, w);
        State::outside(sup, s, s, d, w, tau)
    };

    let mut alpha = zero;
    let mut seg_start = zero;
    let mut zc = 0usize;
    let mut just_changed: Vec<usize> = Vec::new();
    let cap = 16 * n + 64;
    let mut in_support = vec![false; n];
    let mut x: Vec<T> = s.to_vec();

    for _ in 0..cap {
        for &i in &state.support {
            in_support[i] = true;
        }
        let lam = state.lambda(alpha);
        let kappa = weighted_l1(&x, w);

        // Candidate events as (delta, kind, index).
        let mut cand: Vec<(T, ArcEventKind, usize)> = Vec::new();
        if zc < crossings.len() {
            cand.push(((crossings[zc].0 - alpha).max(zero), ArcEventKind::ZeroCross, crossings[zc].1));
        }
        if state.inside {
            if rho > zero {
                cand.push((((tau - kappa) / rho).max(zero), ArcEventKind::BoundaryCross, usize::MAX));
            }
        } else {
            for (&i, &sg) in state.support.iter().zip(&state.signs) {
                let ri = T::c(sg as f64) * d[i];
                let den = w[i] * state.slope - ri;
                if den > zero {
                    let gap = (T::c(sg as f64) * x[i] - lam * w[i]).max(zero);
                    cand.push((gap / den, ArcEventKind::SupportRemove, i));
                }
            }
            for j in 0..n {
                if in_support[j] || d[j] == zero {
                    continue;
                }
                let rate = r[j] - w[j] * state.slope;
                if rate > zero {
                    let gap = (lam * w[j] - x[j].abs()).max(zero);
                    cand.push((gap / rate, ArcEventKind::SupportAdd, j));
                }
            }
            if state.slope < zero {
                cand.push((lam / (-state.slope), ArcEventKind::BoundaryCross, usize::MAX));
            }
        }
        for &i in &state.support {
            in_support[i] = false;
        }

        // Tied indices that were just resolved cannot fire again immediately.
        let scale = alpha.abs();
        let eps_abs = T::c(1e-12) * scale + T::min_positive_value();
        cand.retain(|(delta, kind, i)| {
            !(*delta <= eps_abs
                && matches!(kind, ArcEventKind::SupportAdd | ArcEventKind::SupportRemove)
                && just_changed.contains(i))
        });

        let dmin = cand.iter().map(|c| c.0).fold(T::infinity(), |a, b| a.min(b));
        if !dmin.is_finite() {
            break;
        }
        let alpha_new = alpha + dmin;
        let tie = T::c(1e-12) * (alpha_new.abs() + dmin) + T::min_positive_value();
        let fired: Vec<(ArcEventKind, usize)> =
            cand.iter().filter(|c| c.0 <= dmin + tie).map(|c| (c.1, c.2)).collect();

        alpha = alpha_new;
        for i in 0..n {
            x[i] = s[i] + alpha * d[i];
        }

        // Zero crossings first: every crossing within the tie window.
        let mut crossed = Vec::new();
        while zc < crossings.len() && crossings[zc].0 <= alpha + tie {
            let i = crossings[zc].1;
            r[i] = d[i].abs();
            rho += two * w[i] * d[i].abs();
            x[i] = zero;
            crossed.push(i);
            zc += 1;
        }
        let kappa_new = weighted_l1(&x, w);

        let boundary_fired = fired.iter().any(|f| f.0 == ArcEventKind::BoundaryCross);
        let mut tied: Vec<usize> = fired
            .iter()
            .filter(|f| matches!(f.0, ArcEventKind::SupportAdd | ArcEventKind::SupportRemove))
            .map(|f| f.1)
            .collect();
        tied.sort_unstable();
        tied.dedup();

        let old = state.clone();
        let new_state = if state.inside {
            if boundary_fired && rho > zero {
                boundary_exit(&x, s, d, w, &r, tau)
            } else {
                State::inside()
            }
        } else if boundary_fired {
            if rho <= zero {
                State::inside()
            } else {
                boundary_exit(&x, s, d, w, &r, tau)
            }
        } else if !tied.is_empty() {
            let base: Vec<usize> = state.support.iter().copied().filter(|i| !tied.contains(i)).collect();
            let sup = support_addition_filter(&base, &tied, &r, w);
            State::outside(sup, &x, s, d, w, tau)
        } else {
            state.clone()
        };

        let lambda_after = new_state.lambda(alpha);
        let mu_after = if new_state.inside { zero } else { new_state.slope };
        let mut push_event = |kind: ArcEventKind, indices: Vec<usize>| {
            arc.events.push(ArcEvent {
                alpha,
                kind,
                indices,
                lambda_after,
                kappa_after: kappa_new,
                rho_after: rho,
                mu_after,
            });
        };
        if !crossed.is_empty() {
            push_event(ArcEventKind::ZeroCross, crossed);
        }
        let removed: Vec<usize> =
            old.support.iter().copied().filter(|i| !new_state.support.contains(i)).collect();
        let added: Vec<usize> =
            new_state.support.iter().copied().filter(|i| !old.support.contains(i)).collect();
        if old.inside == new_state.inside {
            if !removed.is_empty() {
                push_event(ArcEventKind::SupportRemove, removed.clone());
            }
            if !added.is_empty() {
                push_event(ArcEventKind::SupportAdd, added.clone());
            }
        } else {
            let idx = if new_state.inside { old.support.clone() } else { new_state.support.clone() };
            push_event(ArcEventKind::BoundaryCross, idx);
        }

        just_changed = tied;
        if !state_same_face(&old, &new_state) {
            if alpha > seg_start {
                arc.segments.push(old.segment(seg_start, alpha));
            }
            seg_start = alpha;
        }
        state = new_state;
    }
    arc.segments.push(state.segment(seg_start, T::infinity()));
    merge_equal_neighbours(&mut arc.segments);
    arc
}

fn state_same_face<T: Scalar>(a: &State<T>, b: &State<T>) -> bool {
    a.inside == b.inside && a.support == b.support && a.signs == b.signs
}

/// State after leaving the ball at `λ = 0`: nonzero coordinates stay, zero
/// coordinates are filtered by their slopes.
fn boundary_exit<T: Scalar>(x: &[T], s: &[T], d: &[T], w: &[T], r: &[T], tau: T) -> State<T> {
    let mut base = Vec::new();
    let mut cands = Vec::new();
    for i in 0..x.len() {
        if x[i] != T::zero() {
            base.push(i);
        } else if d[i] != T::zero() {
            cands.push(i);
        }
    }
    let sup = support_addition_filter(&base, &cands, r, w);
    State::outside(sup, x, s, d, w, tau)
}

fn merge_equal_neighbours<T: Scalar>(segs: &mut Vec<ArcSegment<T>>) {
    let mut out: Vec<ArcSegment<T>> = Vec::with_capacity(segs.len());
    for seg in segs.drain(..) {
        if let Some(last) = out.last_mut() {
            if last.same_face(&seg) {
                last.alpha_end = seg.alpha_end;
                continue;
            }
        }
        out.push(seg);
    }
    *segs = out;
}

/// The projection of the full line `s + αd`, `α ∈ ℝ`.
#[derive(Debug, Clone)]
pub struct LineArc<T> {
    pub s: Vec<T>,
    pub d: Vec<T>,
    pub w: Vec<T>,
    pub tau: T,
    pub segments: Vec<ArcSegment<T>>,
}

impl<T: Scalar> LineArc<T> {
    pub fn breakpoints(&self) -> Vec<T> {
        self.segments.iter().skip(1).map(|s| s.alpha_start).collect()
    }

    pub fn breakpoint_count(&self) -> usize {
        self.segments.len().saturating_sub(1)
    }

    pub fn lambda_at(&self, alpha: T) -> T {
        let k = self.segments.partition_point(|seg| seg.alpha_end < alpha).min(self.segments.len() - 1);
        self.segments[k].lambda_at(alpha)
    }

    pub fn point_at(&self, alpha: T) -> Vec<T> {
        let k = self.segments.partition_point(|seg| seg.alpha_end < alpha).min(self.segments.len() - 1);
        self.segments[k].point(&self.s, &self.d, &self.w, alpha)
    }

    /// Slopes of `λ` piece by piece, from `α = −∞` to `+∞`.
    pub fn lambda_slopes(&self) -> Vec<T> {
        self.segments.iter().map(|s| if s.inside { T::zero() } else { s.lambda_slope }).collect()
    }
}

/// Enumerates the two-sided line by running the ray enumerator forwards and
/// backwards from `s` and joining the two halves at `α = 0`.
pub fn enumerate_line<T: Scalar>(s: &[T], d: &[T], w: &[T], tau: T) -> LineArc<T> {
    let fwd = enumerate_arc(s, d, w, tau);
    let neg: Vec<T> = d.iter().map(|v| -*v).collect();
    let bwd = enumerate_arc(s, &neg, w, tau);
    let mut segments: Vec<ArcSegment<T>> = bwd
        .segments
        .into_iter()
        .rev()
        .map(|seg| ArcSegment {
            alpha_start: -seg.alpha_end,
            alpha_end: -seg.alpha_start,
            lambda_slope: -seg.lambda_slope,
            ..seg
        })
        .collect();
    segments.extend(fwd.segments);
    merge_equal_neighbours(&mut segments);
    LineArc { s: s.to_vec(), d: d.to_vec(), w: w.to_vec(), tau, segments }
}
