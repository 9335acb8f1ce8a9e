use std::path::Path;
use std::time::Instant;

use lassokit::io::{write_bundle, Manifest};
use lassokit::probgen::{gen_instance, GeneratorSpec, MatrixKind};
use lassokit::rootfind::{solve_bpdn, RootStatus, SubSolver};
use lassokit::{hybrid_solve, spg_solve, LassoError, Options, Problem, Report, RootOptions, Status};

use crate::record::{round3, OptionsMeta, ProblemMeta, RootOptionsMeta, RootRecord, RunRecord, SCHEMA};
use crate::{
    GenArgs, KindArg, RootArgs, SolveArgs, SolveFlags, SolverKind, EXIT_ITER_LIMIT, EXIT_OK, EXIT_SOLVER_FAILURE,
    EXIT_USAGE,
};

#[derive(Debug)]
pub struct CmdError {
    pub code: u8,
    pub message: String,
}

impl CmdError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<LassoError> for CmdError {
    fn from(e: LassoError) -> Self {
        let code = match e {
            LassoError::LineSearch(_)
            | LassoError::Stalled
            | LassoError::NumericalUnderflow
            | LassoError::UnboundedRay
            | LassoError::NotDescent
            | LassoError::VertexFace => EXIT_SOLVER_FAILURE,
            _ => EXIT_USAGE,
        };
        Self { code, message: e.to_string() }
    }
}

pub type CmdResult = Result<u8, CmdError>;

pub fn status_code(status: Status) -> u8 {
    match status {
        Status::Optimal => EXIT_OK,
        Status::IterLimit => EXIT_ITER_LIMIT,
        Status::LinesearchFailure => EXIT_SOLVER_FAILURE,
    }
}

impl SolveFlags {
    pub fn options(&self) -> Options {
        Options {
            opt_tol: self.tol,
            max_iter: self.max_iter,
            line_search_mode: self.line_search.mode(),
            trace: self.trace.is_some(),
            ..Options::default()
        }
    }
}

/// Runs one solve from the origin and times it.
pub fn timed_solve(p: &Problem, solver: SolverKind, opts: &Options) -> Result<(Report, f64), LassoError> {
    let x0 = vec![0.0; p.n()];
    let start = Instant::now();
    let rep = match solver {
        SolverKind::Spg => spg_solve(p, &x0, opts)?,
        SolverKind::Hybrid => hybrid_solve(p, &x0, opts)?,
    };
    Ok((rep, start.elapsed().as_secs_f64()))
}

pub fn run_record(problem: ProblemMeta, solver: SolverKind, opts: &Options, rep: &Report, secs: f64) -> RunRecord {
    RunRecord {
        schema: SCHEMA,
        solver: solver.as_str(),
        options: OptionsMeta {
            tol: opts.opt_tol,
            line_search: line_search_name(opts),
            max_iter: opts.max_iter.unwrap_or(10 * problem.m),
        },
        problem,
        iterations: rep.iterations,
        qn_steps: rep.qn_steps,
        pg_steps: rep.pg_steps,
        runtime_s: round3(secs),
        f_final: rep.f_final,
        gap: rep.dual_gap_relative,
        status: rep.status.as_str(),
    }
}

fn line_search_name(opts: &Options) -> &'static str {
    match opts.line_search_mode {
        lassokit::LineSearchMode::Backtracking => "backtrack",
        lassokit::LineSearchMode::ArcFirstLocal => "arc-first",
        lassokit::LineSearchMode::ArcGlobal => "arc-global",
    }
}

fn manifest_meta(path: &Path, manifest: &Manifest, p: &Problem) -> ProblemMeta {
    ProblemMeta {
        source: path.display().to_string(),
        m: p.m(),
        n: p.n(),
        tau: manifest.tau,
        sigma: manifest.sigma,
        mu: manifest.mu,
        k: None,
        dist: None,
        seed: None,
    }
}

fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<(), CmdError>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let io = |e: csv::Error| CmdError::usage(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| CmdError::usage(format!("{}: {e}", path.display())))
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!("{}", serde_json::to_string(value).expect("records serialize"));
}

pub fn solve(args: &SolveArgs) -> CmdResult {
    let manifest = Manifest::read(&args.manifest)?;
    if manifest.sigma.is_some() {
        return Err(CmdError::usage("parse error in sigma: misfit-constrained manifests go through `lassokit root`"));
    }
    let p = manifest.load()?;
    let opts = args.flags.options();
    let (rep, secs) = timed_solve(&p, args.flags.solver, &opts)?;
    if let Some(path) = &args.flags.trace {
        let rows = rep.trace.iter().map(|t| {
            vec![
                t.iteration.to_string(),
                t.f.to_string(),
                t.gap.to_string(),
                t.step_kind.as_str().to_string(),
                t.face_dim.to_string(),
            ]
        });
        write_csv(path, &["iteration", "f", "gap", "step_kind", "face_dim"], rows)?;
    }
    let meta = manifest_meta(&args.manifest, &manifest, &p);
    print_json(&run_record(meta, args.flags.solver, &opts, &rep, secs));
    Ok(status_code(rep.status))
}

pub fn root(args: &RootArgs) -> CmdResult {
    let manifest = Manifest::read(&args.manifest)?;
    let Some(sigma) = manifest.sigma else {
        return Err(CmdError::usage("parse error in sigma: root finding needs a manifest with sigma"));
    };
    let p = manifest.load()?;
    let mut opts = RootOptions::new(sigma);
    opts.inner = Options { trace: false, ..args.flags.options() };
    opts.solver = match args.flags.solver {
        SolverKind::Spg => SubSolver::Spg,
        SolverKind::Hybrid => SubSolver::Hybrid,
    };
    if let Some(t) = args.root_tol {
        opts.root_tol = t;
    }
    if let Some(k) = args.max_subproblems {
        opts.max_subproblems = k;
    }
    let start = Instant::now();
    let rep = solve_bpdn(&p, &opts)?;
    let secs = start.elapsed().as_secs_f64();
    if let Some(path) = &args.flags.trace {
        let rows = rep
            .path
            .iter()
            .enumerate()
            .map(|(i, (tau, misfit))| vec![i.to_string(), tau.to_string(), misfit.to_string()]);
        write_csv(path, &["subproblem", "tau", "misfit"], rows)?;
    }
    let record = RootRecord {
        schema: SCHEMA,
        problem: manifest_meta(&args.manifest, &manifest, &p),
        solver: args.flags.solver.as_str(),
        options: RootOptionsMeta {
            tol: opts.inner.opt_tol,
            root_tol: opts.root_tol,
            max_subproblems: opts.max_subproblems,
            line_search: args.flags.line_search.as_str(),
            max_iter: opts.inner.max_iter.unwrap_or(10 * p.m()),
        },
        tau_root: rep.tau_root,
        misfit: rep.misfit,
        relative_misfit: rep.relative_misfit,
        subproblems: rep.subproblem_count,
        inner_iterations: rep.total_inner_iterations,
        unconverged_subproblems: rep.unconverged_subproblems,
        runtime_s: round3(secs),
        status: rep.status.as_str(),
    };
    print_json(&record);
    Ok(match rep.status {
        RootStatus::Root => EXIT_OK,
        RootStatus::BudgetExhausted => EXIT_ITER_LIMIT,
        RootStatus::SubproblemFailure => EXIT_SOLVER_FAILURE,
    })
}

pub fn generate(args: &GenArgs) -> CmdResult {
    let mut spec = GeneratorSpec::new(args.m, args.n, args.k, args.dist, args.seed);
    spec.kind = match (args.kind, args.gamma) {
        (KindArg::Gaussian, None) => MatrixKind::GaussianUnitColumns,
        (KindArg::Gaussian, Some(_)) => return Err(CmdError::usage("--gamma only applies to --kind sphere-walk")),
        (KindArg::SphereWalk, Some(gamma)) => MatrixKind::SphereWalk { gamma },
        (KindArg::SphereWalk, None) => return Err(CmdError::usage("--kind sphere-walk needs --gamma")),
    };
    spec.noise_fraction = args.noise;
    if let Some(t) = args.tau_mult {
        spec.tau_mult = t;
    }
    spec.sigma_frac = args.sigma_frac;
    let inst = gen_instance(&spec)?;
    write_bundle(&args.out, &inst)?;
    print_json(&inst.metadata);
    Ok(EXIT_OK)
}
