use std::io::Write;
use std::sync::Arc;

use lassokit::probgen::{gen_instance, GeneratorSpec, MatrixKind, SignalDist};
use lassokit::{Options, Problem, Status};
use rayon::prelude::*;
use serde::Deserialize;

use crate::commands::{run_record, timed_solve, CmdError, CmdResult};
use crate::record::{round3, ProblemMeta, RunRecord};
use crate::{BenchArgs, LineSearchArg, SolverKind, EXIT_OK};

pub const COLUMNS: [&str; 9] =
    ["k", "dist", "solver", "tol", "mean_time", "mean_iters", "pct_solved", "median_gap", "mean_speedup_vs_spg"];

/// Sweep description. Any empty list, or `instances = 0`, gives an empty sweep.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub m: usize,
    #[serde(default)]
    pub n: usize,
    #[serde(default)]
    pub ks: Vec<usize>,
    #[serde(default)]
    pub dists: Vec<SignalDist>,
    #[serde(default)]
    pub solvers: Vec<SolverKind>,
    #[serde(default)]
    pub tols: Vec<f64>,
    #[serde(default)]
    pub instances: usize,
    /// Instance `i` uses seed `seed + i`, the same seed `lassokit gen` takes.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tau_mult")]
    pub tau_mult: f64,
    #[serde(default)]
    pub noise: f64,
    /// Sphere-walk matrices when set, Gaussian otherwise.
    pub gamma: Option<f64>,
    #[serde(default)]
    pub line_search: LineSearchArg,
    pub max_iter: Option<usize>,
}

fn default_tau_mult() -> f64 {
    0.99
}

impl SweepConfig {
    fn is_empty(&self) -> bool {
        self.instances == 0 || self.ks.is_empty() || self.dists.is_empty() || self.solvers.is_empty() || self.tols.is_empty()
    }

    fn spec(&self, k: usize, dist: SignalDist, i: usize) -> GeneratorSpec {
        let mut spec = GeneratorSpec::new(self.m, self.n, k, dist, self.seed + i as u64);
        if let Some(gamma) = self.gamma {
            spec.kind = MatrixKind::SphereWalk { gamma };
        }
        spec.noise_fraction = self.noise;
        spec.tau_mult = self.tau_mult;
        spec
    }
}

struct Run {
    record: RunRecord,
    secs: f64,
    solved: bool,
}

/// Worker pool size from `LASSOKIT_THREADS`; unset means rayon's default.
fn thread_count() -> Result<Option<usize>, CmdError> {
    match std::env::var("LASSOKIT_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CmdError::usage(format!("LASSOKIT_THREADS must be a positive integer, got '{v}'"))),
        },
    }
}

/// All runs on one generated instance, in (solver, tol) order.
fn run_instance(cfg: &SweepConfig, k: usize, dist: SignalDist, i: usize) -> Result<Vec<Run>, CmdError> {
    let spec = cfg.spec(k, dist, i);
    let inst = gen_instance(&spec)?;
    let p = Problem::new(Arc::new(inst.a), inst.b, inst.tau)?;
    let mut runs = Vec::with_capacity(cfg.solvers.len() * cfg.tols.len());
    for &solver in &cfg.solvers {
        for &tol in &cfg.tols {
            let opts = Options {
                opt_tol: tol,
                max_iter: cfg.max_iter,
                line_search_mode: cfg.line_search.mode(),
                ..Options::default()
            };
            let (rep, secs) = timed_solve(&p, solver, &opts)?;
            let meta = ProblemMeta {
                source: "generated".to_string(),
                m: cfg.m,
                n: cfg.n,
                tau: Some(inst.tau),
                sigma: None,
                mu: 0.0,
                k: Some(k),
                dist: Some(dist.as_str()),
                seed: Some(spec.seed),
            };
            runs.push(Run { record: run_record(meta, solver, &opts, &rep, secs), secs, solved: rep.status == Status::Optimal });
        }
    }
    Ok(runs)
}

/// Shortest round-trip form, in exponent notation outside `[1e-3, 1e6)`.
fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-3..1e6).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let h = v.len() / 2;
    if v.len() % 2 == 1 {
        v[h]
    } else {
        0.5 * (v[h - 1] + v[h])
    }
}

/// Summary rows. `per_instance[i]` holds the runs of instance `i` for one (k, dist).
fn summarize(cfg: &SweepConfig, k: usize, dist: SignalDist, per_instance: &[Vec<Run>]) -> Vec<Vec<String>> {
    let n_tols = cfg.tols.len();
    let spg = cfg.solvers.iter().position(|s| *s == SolverKind::Spg);
    let mut rows = Vec::new();
    for (si, solver) in cfg.solvers.iter().enumerate() {
        for (ti, tol) in cfg.tols.iter().enumerate() {
            let runs: Vec<&Run> = per_instance.iter().map(|r| &r[si * n_tols + ti]).collect();
            let times: Vec<f64> = runs.iter().map(|r| r.secs).collect();
            let iters: Vec<f64> = runs.iter().map(|r| r.record.iterations as f64).collect();
            let solved = runs.iter().filter(|r| r.solved).count();
            let gaps: Vec<f64> = runs.iter().map(|r| r.record.gap).collect();
            let speedup = spg.map(|s| {
                let ratios: Vec<f64> = per_instance
                    .iter()
                    .map(|r| r[s * n_tols + ti].secs / r[si * n_tols + ti].secs.max(1e-9))
                    .collect();
                num(round3(mean(&ratios)))
            });
            rows.push(vec![
                k.to_string(),
                dist.as_str().to_string(),
                solver.as_str().to_string(),
                num(*tol),
                num(round3(mean(&times))),
                num(mean(&iters)),
                num(100.0 * solved as f64 / runs.len() as f64),
                num(median(gaps)),
                speedup.unwrap_or_default(),
            ]);
        }
    }
    rows
}

pub fn run(args: &BenchArgs) -> CmdResult {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CmdError::usage(format!("{}: {e}", args.config.display())))?;
    let cfg: SweepConfig =
        toml::from_str(&text).map_err(|e| CmdError::usage(format!("{}: {e}", args.config.display())))?;
    let threads = thread_count()?;

    let mut cells = Vec::new();
    if !cfg.is_empty() {
        for &k in &cfg.ks {
            for &dist in &cfg.dists {
                cells.push((k, dist));
            }
        }
    }
    let jobs: Vec<(usize, SignalDist, usize)> =
        cells.iter().flat_map(|&(k, d)| (0..cfg.instances).map(move |i| (k, d, i))).collect();
    let work = || jobs.par_iter().map(|&(k, d, i)| run_instance(&cfg, k, d, i)).collect::<Result<Vec<_>, _>>();
    let results = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CmdError::usage(e.to_string()))?
            .install(work)?,
        None => work()?,
    };

    // Emission happens after all workers finish, in job order.
    let mut rows = Vec::new();
    for (cell, chunk) in cells.iter().zip(results.chunks(cfg.instances.max(1))) {
        rows.extend(summarize(&cfg, cell.0, cell.1, chunk));
    }
    if let Some(path) = &args.records {
        let mut out = String::new();
        for run in results.iter().flatten() {
            out.push_str(&serde_json::to_string(&run.record).expect("records serialize"));
            out.push('\n');
        }
        std::fs::write(path, out).map_err(|e| CmdError::usage(format!("{}: {e}", path.display())))?;
    }

    let sink: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(
            std::fs::File::create(path).map_err(|e| CmdError::usage(format!("{}: {e}", path.display())))?,
        ),
        None => Box::new(std::io::stdout()),
    };
    let mut w = csv::Writer::from_writer(sink);
    let io = |e: csv::Error| CmdError::usage(e.to_string());
    w.write_record(COLUMNS).map_err(io)?;
    for row in &rows {
        w.write_record(row).map_err(io)?;
    }
    w.flush().map_err(|e| CmdError::usage(e.to_string()))?;
    Ok(EXIT_OK)
}
