//! Heaviside-loss support matrix machine with an explicit rank constraint.
//!
//! The classifier scores a matrix sample `X` with `⟨W, X⟩ + b` and is trained
//! by minimizing the penalized objective
//!
//! ```text
//! g(W, z, b) = ½‖W‖_F² + β‖z₊‖₀ + σ‖z − 1 + y∘(⟨W, X_i⟩ + b)‖²   s.t. rank(W) ≤ r
//! ```
//!
//! with a three-block proximal alternating minimization ([`solver::fit`]).
//! Every block update has a closed form: a projected gradient step onto the
//! rank-`r` set for `W`, hard thresholding of positive entries for `z`, and a
//! scalar quadratic for `b`.
//!
//! Module map:
//!
//! * [`linalg`]: SVD, rank projection, Frobenius inner products.
//! * [`model`]: datasets, hyperparameters, objective, Heaviside prox, prediction.
//! * [`solver`]: the alternating minimization and its trace.
//! * [`kkt`]: stationarity residuals of a fitted point.
//! * [`data`]: ingestion, normalization, splitting, noise injection.
//! * [`experiments`]: metrics, grid search, noise and sensitivity sweeps, exports.
//!
//! Sweep cells run on rayon when the `parallel` feature is enabled (the
//! default); the [`par::Execution`] mode selects sequential execution at
//! runtime either way.

pub mod data;
pub mod error;
pub mod experiments;
pub mod kkt;
pub mod linalg;
pub mod model;
pub mod par;
pub mod rng;
pub mod solver;
pub mod synthetic;

pub use error::{Error, Result};
pub use model::{Dataset, Hyperparams, Label, MatrixSample, ModelState, StepPolicy, ZUpdate};
pub use solver::{fit, FitResult, SolverTrace, Status};
