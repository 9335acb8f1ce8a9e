//! Solvers for least squares over a weighted one-norm ball,
//!
//! ```text
//! minimize ½‖Ax − b‖² + (μ/2)‖x‖² + cᵀx   subject to   Σ w_i|x_i| ≤ τ,
//! ```
//!
//! by spectral projected gradient and by a hybrid method that runs L-BFGS on
//! the current face of the ball. Basis-pursuit denoise is handled by root
//! finding on the Pareto curve.
//!
//! Everything is generic over the scalar type; the aliases below fix `f64`.

pub mod arc;
pub mod ball;
pub mod duality;
pub mod error;
pub mod facebasis;
pub mod io;
pub mod lbfgs;
pub mod linalg;
pub mod linesearch;
pub mod model;
pub mod probgen;
pub mod rootfind;
pub mod scalar;
pub mod solver;

pub use error::{LassoError, Result};
pub use model::{LineSearchMode, LinearOperator};
pub use scalar::Scalar;
pub use solver::{hybrid_solve, spg_solve, Status, StepKind};

pub type Matrix = model::DenseMatrix<f64>;
pub type Problem = model::LassoProblem<f64>;
pub type Options = model::SolverOptions<f64>;
pub type Report = solver::SolverReport<f64>;
pub type Iterate = model::Iterate<f64>;
pub type RootOptions = rootfind::RootOptions<f64>;
pub type RootReport = rootfind::RootReport<f64>;
pub type Arc = arc::ProjectionArc<f64>;
pub type FaceBasis = facebasis::FaceBasis<f64>;
