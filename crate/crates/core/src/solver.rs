//! Spectral projected gradient and the hybrid face-restricted quasi-Newton
//! solver.

use crate::arc::enumerate_arc;
use crate::ball::{face_of, in_self_projection_cone, max_step_on_face, project, FaceId};
use crate::duality::{stopping_oracle, BestPair, StopDecision};
use crate::error::{LassoError, Result};
use crate::facebasis::ReducedBasis;
use crate::lbfgs::{lbfgs_direction, LbfgsModel};
use crate::linalg::{dot, norm2};
use crate::linesearch::{
    bb_step, face_wolfe_search, initial_step, nonmonotone_armijo_backtrack, trajectory_search, ArcMode, FaceStep,
    HistoryBuffer, StepOutcome,
};
use crate::model::{Iterate, LassoProblem, LineSearchMode, SolverOptions};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    IterLimit,
    LinesearchFailure,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::IterLimit => "iter_limit",
            Status::LinesearchFailure => "linesearch_failure",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Initial,
    ProjectedGradient,
    QuasiNewton,
}

impl StepKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            StepKind::Initial => "initial",
            StepKind::ProjectedGradient => "pg",
            StepKind::QuasiNewton => "qn",
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub f: f64,
    pub gap: f64,
    pub step_kind: StepKind,
    pub face_dim: usize,
}

#[derive(Debug, Clone)]
pub struct SolverReport<T> {
    /// Best primal point seen.
    pub x_final: Vec<T>,
    pub f_final: T,
    pub dual_gap_relative: T,
    /// Best dual objective, a lower bound on the optimal value.
    pub dual_obj: T,
    /// Dual multiplier of the best certificate; the slope of the Pareto curve
    /// at the root finder's outer level.
    pub lambda: T,
    pub iterations: usize,
    pub qn_steps: usize,
    pub pg_steps: usize,
    pub status: Status,
    /// Quasi-Newton steps whose end point left the support of their face.
    pub qn_support_violations: usize,
    /// Largest objective increase over the nonmonotone reference value.
    pub max_history_excess: T,
    pub trace: Vec<TraceRecord>,
}

/// Runs the spectral projected-gradient method.
pub fn spg_solve<T: Scalar>(problem: &LassoProblem<T>, x0: &[T], options: &SolverOptions<T>) -> Result<SolverReport<T>> {
    run(problem, x0, options, false)
}

/// Runs the hybrid method: quasi-Newton steps restricted to the current face
/// while the update criterion holds, projected-gradient steps otherwise.
pub fn hybrid_solve<T: Scalar>(problem: &LassoProblem<T>, x0: &[T], options: &SolverOptions<T>) -> Result<SolverReport<T>> {
    run(problem, x0, options, true)
}

fn support_subset(inner: &FaceId, outer: &FaceId) -> bool {
    match (inner, outer) {
        (_, FaceId::Interior) => true,
        (FaceId::Interior, FaceId::Proper { .. }) => false,
        (FaceId::Proper { signs: a }, FaceId::Proper { signs: b }) => {
            a.iter().zip(b).all(|(x, y)| *x == 0 || x == y)
        }
    }
}

struct QnAttempt<T: Scalar> {
    it: Iterate<T>,
}

fn try_qn_step<T: Scalar>(
    problem: &LassoProblem<T>,
    it: &Iterate<T>,
    model: &LbfgsModel<T>,
    options: &SolverOptions<T>,
) -> Result<Option<QnAttempt<T>>> {
    let basis = model.basis();
    let g_red = basis.apply_adjoint(&it.g)?;
    let d_red = lbfgs_direction(model, &g_red);
    let d = basis.apply(&d_red)?;
    if !(dot(&it.g, &d) < T::zero()) {
        return Ok(None);
    }
    let bound = max_step_on_face(&it.x, &d, &problem.w, problem.tau);
    if !(bound > T::zero()) {
        return Ok(None);
    }
    match face_wolfe_search(problem, it, &d, bound, options) {
        Ok(FaceStep::Accepted { x, r, .. }) => {
            if face_of(&x, &problem.w, problem.tau).is_err() {
                return Ok(None);
            }
            Ok(Some(QnAttempt { it: Iterate::from_residual(problem, x, r)? }))
        }
        Ok(FaceStep::Rejected) | Err(LassoError::NotDescent) | Err(LassoError::UnboundedRay) => Ok(None),
        Err(e) => Err(e),
    }
}

fn pg_step<T: Scalar>(
    problem: &LassoProblem<T>,
    it: &Iterate<T>,
    alpha: T,
    history: &HistoryBuffer<T>,
    options: &SolverOptions<T>,
) -> Result<StepOutcome<T>> {
    let mode = match options.line_search_mode {
        LineSearchMode::Backtracking => None,
        LineSearchMode::ArcFirstLocal => Some(ArcMode::FirstLocal),
        LineSearchMode::ArcGlobal => Some(ArcMode::Global),
    };
    if let Some(mode) = mode {
        let d: Vec<T> = it.g.iter().map(|g| -alpha * *g).collect();
        let arc = enumerate_arc(&it.x, &d, &problem.w, problem.tau);
        if let Some(step) = trajectory_search(problem, it, &arc, mode, history, options)?.step {
            return Ok(step);
        }
    }
    nonmonotone_armijo_backtrack(
        problem,
        it,
        alpha,
        history,
        options.armijo_gamma,
        options.armijo_backtrack,
        options.max_backtracks,
    )
}

fn run<T: Scalar>(problem: &LassoProblem<T>, x0: &[T], options: &SolverOptions<T>, hybrid: bool) -> Result<SolverReport<T>> {
    options.validate()?;
    problem.check_x(x0)?;
    let n = problem.n();
    let x_start = project(x0, &problem.w, problem.tau)?.x;
    let mut it = crate::model::evaluate(problem, &x_start)?;
    let cap = options.iteration_cap(problem.m());

    let mut best = BestPair::new();
    let mut gap = best.update(problem, &it);
    let mut history = HistoryBuffer::new(options.history_m);
    history.push(it.f_val);
    let mut alpha = initial_step(problem, &it, options.bb_min, options.bb_max)?;
    let mut model: Option<LbfgsModel<T>> = None;
    let mut incremental = 0usize;

    let mut trace = Vec::new();
    let record = |trace: &mut Vec<TraceRecord>, k: usize, it: &Iterate<T>, gap: T, kind: StepKind| {
        if options.trace {
            trace.push(TraceRecord {
                iteration: k,
                f: it.f_val.to_f64_lossy(),
                gap: gap.to_f64_lossy(),
                step_kind: kind,
                face_dim: it.face.dim(n),
            });
        }
    };
    record(&mut trace, 0, &it, gap, StepKind::Initial);

    let mut iterations = 0;
    let mut qn_steps = 0;
    let mut pg_steps = 0;
    let mut qn_support_violations = 0;
    let mut max_history_excess = T::neg_infinity();
    let status = loop {
        if stopping_oracle(&best, options.opt_tol) == StopDecision::Optimal {
            break Status::Optimal;
        }
        if iterations >= cap {
            break Status::IterLimit;
        }
        iterations += 1;
        let f_ref = history.max();

        let mut next: Option<(Iterate<T>, StepKind)> = None;
        if let Some(mdl) = model.as_ref() {
            if let Some(QnAttempt { it: mut cand }) = try_qn_step(problem, &it, mdl, options)? {
                incremental += 1;
                if incremental >= options.recompute_every {
                    let r = problem.residual(&cand.x);
                    cand = Iterate::from_residual(problem, cand.x, r)?;
                    incremental = 0;
                }
                if !support_subset(&cand.face, &it.face) {
                    qn_support_violations += 1;
                }
                next = Some((cand, StepKind::QuasiNewton));
            }
        }
        let (new_it, kind) = match next {
            Some(v) => v,
            None => match pg_step(problem, &it, alpha, &history, options) {
                Ok(step) if step.stationary => {
                    break if best.gap_relative() <= options.opt_tol { Status::Optimal } else { Status::LinesearchFailure };
                }
                Ok(step) => (Iterate::from_residual(problem, step.x, step.r)?, StepKind::ProjectedGradient),
                Err(LassoError::LineSearch(_)) => break Status::LinesearchFailure,
                Err(e) => return Err(e),
            },
        };
        max_history_excess = max_history_excess.max(new_it.f_val - f_ref);
        match kind {
            StepKind::QuasiNewton => {
                qn_steps += 1;
                history.reset(new_it.f_val);
            }
            _ => {
                pg_steps += 1;
                incremental = 0;
                history.push(new_it.f_val);
            }
        }

        let s: Vec<T> = new_it.x.iter().zip(&it.x).map(|(a, b)| *a - *b).collect();
        let y: Vec<T> = new_it.g.iter().zip(&it.g).map(|(a, b)| *a - *b).collect();
        alpha = bb_step(&s, &y, options.bb_min, options.bb_max);

        if hybrid {
            let neg_g: Vec<T> = new_it.g.iter().map(|v| -*v).collect();
            let keep = new_it.face == it.face
                && in_self_projection_cone(&new_it.x, &neg_g, &problem.w, problem.tau);
            if keep {
                if model.is_none() {
                    model = fresh_model(&new_it.face, &problem.w, &s, &y, options)?;
                }
                if let Some(mdl) = model.as_mut() {
                    let sr = mdl.basis().apply_adjoint(&s)?;
                    let yr = mdl.basis().apply_adjoint(&y)?;
                    mdl.update(sr, yr);
                }
            } else {
                model = None;
            }
        }

        it = new_it;
        gap = best.update(problem, &it);
        record(&mut trace, iterations, &it, gap, kind);
    };

    Ok(SolverReport {
        x_final: best.best_x.clone(),
        f_final: best.best_f,
        dual_gap_relative: best.gap_relative(),
        dual_obj: best.best_dual_obj(),
        lambda: best.best_lambda(),
        iterations,
        qn_steps,
        pg_steps,
        status,
        qn_support_violations,
        max_history_excess: if max_history_excess.is_finite() { max_history_excess } else { T::zero() },
        trace,
    })
}

/// Model for a face just entered: `h0` from the reduced triggering pair.
/// Vertices and pairs without positive curvature give no model.
fn fresh_model<T: Scalar>(
    face: &FaceId,
    w: &[T],
    s: &[T],
    y: &[T],
    options: &SolverOptions<T>,
) -> Result<Option<LbfgsModel<T>>> {
    let basis = match ReducedBasis::for_face(face, w) {
        Ok(b) => b,
        Err(LassoError::VertexFace) | Err(LassoError::NumericalUnderflow) => return Ok(None),
        Err(e) => return Err(e),
    };
    let sr = basis.apply_adjoint(s)?;
    let yr = basis.apply_adjoint(y)?;
    let sy = dot(&sr, &yr);
    if !(sy > T::c(1e-12) * norm2(&sr) * norm2(&yr)) {
        return Ok(None);
    }
    let h0 = bb_step(&sr, &yr, options.bb_min, options.bb_max);
    Ok(Some(LbfgsModel::new(basis, h0, options.lbfgs_memory)))
}
