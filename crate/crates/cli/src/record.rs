//! Machine-readable run records. Field order is the serialization order.

use serde::Serialize;

pub const SCHEMA: u32 = 1;

/// Rounds to three significant digits.
pub fn round3(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.2e}").parse().unwrap_or(x)
}

#[derive(Debug, Clone, Serialize)]
pub struct ProblemMeta {
    /// Manifest path, or `generated` for bench instances.
    pub source: String,
    pub m: usize,
    pub n: usize,
    pub tau: Option<f64>,
    pub sigma: Option<f64>,
    pub mu: f64,
    pub k: Option<usize>,
    pub dist: Option<&'static str>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OptionsMeta {
    pub tol: f64,
    pub line_search: &'static str,
    pub max_iter: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub schema: u32,
    pub problem: ProblemMeta,
    pub solver: &'static str,
    pub options: OptionsMeta,
    pub iterations: usize,
    pub qn_steps: usize,
    pub pg_steps: usize,
    pub runtime_s: f64,
    pub f_final: f64,
    pub gap: f64,
    pub status: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct RootOptionsMeta {
    pub tol: f64,
    pub root_tol: f64,
    pub max_subproblems: usize,
    pub line_search: &'static str,
    pub max_iter: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RootRecord {
    pub schema: u32,
    pub problem: ProblemMeta,
    pub solver: &'static str,
    pub options: RootOptionsMeta,
    pub tau_root: f64,
    pub misfit: f64,
    pub relative_misfit: f64,
    pub subproblems: usize,
    pub inner_iterations: usize,
    pub unconverged_subproblems: usize,
    pub runtime_s: f64,
    pub status: &'static str,
}
