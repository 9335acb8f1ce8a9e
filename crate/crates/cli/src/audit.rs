use lassokit::arc::enumerate_line;
use lassokit::arc::extremal::extremal_construction;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::commands::{CmdError, CmdResult};
use crate::{AuditArgs, EXIT_OK};

/// Random line in `Rⁿ`: Gaussian start and direction, unit weights on even
/// trials and weights in `[0.2, 5]` on odd ones, radius a random fraction of
/// the start's weighted norm.
fn random_line_breakpoints(r: &mut ChaCha20Rng, n: usize, trial: usize) -> usize {
    let s: Vec<f64> = (0..n).map(|_| r.sample(StandardNormal)).collect();
    let d: Vec<f64> = (0..n).map(|_| r.sample(StandardNormal)).collect();
    let w: Vec<f64> = if trial % 2 == 0 { vec![1.0; n] } else { (0..n).map(|_| r.gen_range(0.2..5.0)).collect() };
    let norm: f64 = s.iter().zip(&w).map(|(x, w)| w * x.abs()).sum();
    let tau = r.gen_range(0.05..1.0) * norm;
    enumerate_line(&s, &d, &w, tau).breakpoint_count()
}

pub fn run(args: &AuditArgs) -> CmdResult {
    if args.n == 0 {
        return Err(CmdError::usage("--n must be at least 1"));
    }
    let n = args.n;
    let bound = 4 * n - 2;
    let mut r = ChaCha20Rng::seed_from_u64(args.seed);
    let max_seen = (0..args.trials).map(|t| random_line_breakpoints(&mut r, n, t)).max().unwrap_or(0);
    let inst = extremal_construction::<f64>(n);
    let built = enumerate_line(&inst.start, &inst.direction, &inst.w, inst.tau).breakpoint_count();
    let verdict = |ok: bool| if ok { "PASS" } else { "FAIL" };
    println!("n = {n}");
    println!("trials = {}", args.trials);
    println!("seed = {}", args.seed);
    println!("bound = {bound}");
    println!("max_breakpoints = {max_seen}");
    println!("random = {}", verdict(max_seen <= bound));
    println!("construction_breakpoints = {built}");
    println!("construction = {}", verdict(built == bound));
    Ok(if max_seen <= bound && built == bound { EXIT_OK } else { 1 })
}
