//! Proximal alternating minimization over the blocks `W`, `z`, `b`.
//!
//! Each outer iteration performs
//!
//! 1. `W ← Π_r(W − α∇h(W))`, a projected gradient step on the smooth part
//!    `h(W) = ½‖W‖_F² + σ‖z − 1 + y∘(⟨W, X⟩ + b)‖²` with a backtracking test
//!    that enforces `g(W⁺) + τ₁/2‖W⁺ − W‖² ≤ g(W)`;
//! 2. `z ← argmin β‖z₊‖₀ + σ‖z − v‖² + τ₂/2‖z − zᵏ‖²`, solved exactly by
//!    positive-side hard thresholding;
//! 3. `b ← argmin σ‖z − v(b)‖² + τ₃/2(b − bᵏ)²`, a scalar quadratic.
//!
//! Summing the three block inequalities gives the sufficient decrease
//! `g_k − g_{k+1} ≥ τ_min/2 (‖ΔW‖² + ‖Δz‖² + Δb²)` which every fit checks.

use std::io::Write;
use std::time::Instant;

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};
use crate::model::{
    hard_threshold_positive, heaviside_count, Dataset, Hyperparams, InitialStep, ModelState,
    StepPolicy, ZUpdate,
};

/// Absolute slack allowed on the per-iteration sufficient-decrease check.
pub const DECREASE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    MaxIter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub iter: usize,
    pub objective: f64,
    pub w_step_norm: f64,
    pub z_step_norm: f64,
    pub b_step: f64,
    pub halvings: u32,
    /// Backtracking exhausted and `W` was kept.
    pub stalled: bool,
    /// `g_k − g_{k+1} − τ_min/2 (‖ΔW‖² + ‖Δz‖² + Δb²)`; non-negative up to
    /// rounding when the decrease guarantee holds.
    pub decrease_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverTrace {
    /// Row 0 is the initial state.
    pub records: Vec<IterRecord>,
    pub status: Status,
}

impl SolverTrace {
    pub fn objectives(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.objective)
    }

    pub fn final_objective(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.objective)
    }

    /// Number of completed iterations.
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn is_monotone(&self, slack: f64) -> bool {
        self.records
            .windows(2)
            .all(|w| w[1].objective <= w[0].objective + slack)
    }

    /// Smallest decrease margin over all iterations (`+∞` when none ran).
    pub fn min_decrease_margin(&self) -> f64 {
        self.records
            .iter()
            .skip(1)
            .map(|r| r.decrease_margin)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn stalls(&self) -> usize {
        self.records.iter().filter(|r| r.stalled).count()
    }

    /// Columns `iter,objective,w_step_norm,z_step_norm,b_step,halvings`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "iter,objective,w_step_norm,z_step_norm,b_step,halvings"
        )?;
        for r in &self.records {
            writeln!(
                out,
                "{},{:e},{:e},{:e},{:e},{}",
                r.iter, r.objective, r.w_step_norm, r.z_step_norm, r.b_step, r.halvings
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub model: ModelState,
    pub trace: SolverTrace,
    pub hyperparams_echo: Hyperparams,
    /// Seconds.
    pub wall_time: f64,
}

/// Outcome of one `W`-block update.
#[derive(Debug, Clone)]
pub struct WStep {
    pub w: Matrix,
    pub halvings: u32,
    pub stalled: bool,
    pub alpha: f64,
}

/// Per-fit cache of the stacked design matrix.
struct Workspace {
    design: Matrix,
    y: Vector,
    shape: (usize, usize),
    sq_norm_sum: f64,
}

impl Workspace {
    fn new(data: &Dataset) -> Self {
        let design = data.design_matrix();
        let sq_norm_sum = design.norm_squared();
        Workspace {
            design,
            y: data.labels(),
            shape: data.shape(),
            sq_norm_sum,
        }
    }

    fn m(&self) -> usize {
        self.y.len()
    }

    fn scores(&self, w: &Matrix) -> Vector {
        &self.design * Vector::from_column_slice(w.as_slice())
    }

    /// `v = 1 − y∘(⟨W, X_i⟩ + b)`.
    fn residuals(&self, w: &Matrix, b: f64) -> Vector {
        let s = self.scores(w);
        Vector::from_fn(self.m(), |i, _| 1.0 - self.y[i] * (s[i] + b))
    }

    fn objective(&self, w: &Matrix, z: &Vector, b: f64, hp: &Hyperparams) -> f64 {
        let v = self.residuals(w, b);
        0.5 * w.norm_squared()
            + hp.beta * heaviside_count(z) as f64
            + hp.sigma * (z - v).norm_squared()
    }

    fn grad(&self, w: &Matrix, z: &Vector, b: f64, sigma: f64) -> Matrix {
        let v = self.residuals(w, b);
        let weights = (z - v).component_mul(&self.y) * (2.0 * sigma);
        let g = self.design.tr_mul(&weights);
        w + Matrix::from_column_slice(self.shape.0, self.shape.1, g.as_slice())
    }

    /// `‖𝒜‖₂²`: the largest eigenvalue of the smaller Gram matrix.
    fn spectral_sq(&self) -> f64 {
        let a = &self.design;
        let gram = if a.nrows() <= a.ncols() {
            a * a.transpose()
        } else {
            a.transpose() * a
        };
        SymmetricEigen::new(gram).eigenvalues.max().max(0.0)
    }

    fn initial_step(&self, hp: &Hyperparams) -> f64 {
        match hp.step_policy {
            StepPolicy::Fixed { alpha } => alpha,
            StepPolicy::Backtracking { alpha0, .. } => match alpha0 {
                InitialStep::Spectral => {
                    1.0 / (1.0 + 2.0 * hp.sigma * self.spectral_sq() + hp.tau1)
                }
                InitialStep::Frobenius => 1.0 / (1.0 + 2.0 * hp.sigma * self.sq_norm_sum),
                InitialStep::Value(a) => a,
            },
        }
    }

    fn update_w(&self, state: &ModelState, hp: &Hyperparams, alpha0: f64) -> Result<WStep> {
        let grad = self.grad(&state.w, &state.z, state.b, hp.sigma);
        if !grad.iter().all(|x| x.is_finite()) {
            return Err(Error::Numerical {
                iter: state.iter,
                reason: "gradient of the smooth part is not finite".into(),
            });
        }
        let project = |alpha: f64| -> Result<Matrix> {
            let trial = &state.w - &grad * alpha;
            linalg::project_rank(&trial, hp.rank)
                .map(|p| p.matrix)
                .map_err(|e| match e {
                    Error::InvalidInput(reason) => Error::Numerical {
                        iter: state.iter,
                        reason,
                    },
                    other => other,
                })
        };
        match hp.step_policy {
            StepPolicy::Fixed { alpha } => Ok(WStep {
                w: project(alpha)?,
                halvings: 0,
                stalled: false,
                alpha,
            }),
            StepPolicy::Backtracking {
                shrink,
                max_halvings,
                ..
            } => {
                let current = self.objective(&state.w, &state.z, state.b, hp);
                let mut alpha = alpha0;
                for halvings in 0..=max_halvings {
                    let w = project(alpha)?;
                    let trial = self.objective(&w, &state.z, state.b, hp)
                        + 0.5 * hp.tau1 * (&w - &state.w).norm_squared();
                    if trial <= current {
                        return Ok(WStep {
                            w,
                            halvings,
                            stalled: false,
                            alpha,
                        });
                    }
                    alpha *= shrink;
                }
                Ok(WStep {
                    w: state.w.clone(),
                    halvings: max_halvings,
                    stalled: true,
                    alpha: 0.0,
                })
            }
        }
    }

    fn update_z(&self, w: &Matrix, b: f64, z_prev: &Vector, hp: &Hyperparams) -> Vector {
        let v = self.residuals(w, b);
        let (denom, threshold) = match hp.z_update {
            ZUpdate::Exact => {
                let d = 2.0 * hp.sigma + hp.tau2;
                (d, (2.0 * hp.beta / d).sqrt())
            }
            ZUpdate::Paper => {
                let d = hp.sigma + hp.tau2;
                (d, (4.0 * hp.beta / d).sqrt())
            }
        };
        Vector::from_fn(self.m(), |i, _| {
            let center = (2.0 * hp.sigma * v[i] + hp.tau2 * z_prev[i]) / denom;
            hard_threshold_positive(center, threshold)
        })
    }

    fn update_b(&self, w: &Matrix, z: &Vector, b_prev: f64, hp: &Hyperparams) -> f64 {
        let s = self.scores(w);
        // yᵀ(z − 1 + y∘s)
        let mut acc = 0.0;
        for i in 0..self.m() {
            acc += self.y[i] * (z[i] - 1.0 + self.y[i] * s[i]);
        }
        let yty = self.y.norm_squared();
        (hp.tau3 * b_prev - 2.0 * hp.sigma * acc) / (2.0 * hp.sigma * yty + hp.tau3)
    }
}

/// `∇h(W) = W + 2σ Σ_i y_i (z_i − 1 + y_i⟨W, X_i⟩ + b y_i) X_i`.
pub fn grad_h(w: &Matrix, z: &Vector, b: f64, data: &Dataset, sigma: f64) -> Result<Matrix> {
    data.check_shape(w.shape())?;
    check_len(z, data)?;
    Ok(Workspace::new(data).grad(w, z, b, sigma))
}

/// Smooth part `h(W) = ½‖W‖_F² + σ‖z − v(W, b)‖²`.
pub fn smooth_part(w: &Matrix, z: &Vector, b: f64, data: &Dataset, sigma: f64) -> Result<f64> {
    let v = crate::model::margin_residuals(w, b, data)?;
    check_len(z, data)?;
    Ok(0.5 * w.norm_squared() + sigma * (z - v).norm_squared())
}

fn check_len(z: &Vector, data: &Dataset) -> Result<()> {
    if z.len() != data.len() {
        return Err(Error::invalid_arg(format!(
            "vector of length {} for {} samples",
            z.len(),
            data.len()
        )));
    }
    Ok(())
}

/// Step size the backtracking search (or the fixed policy) starts from.
pub fn initial_step(data: &Dataset, hp: &Hyperparams) -> f64 {
    Workspace::new(data).initial_step(hp)
}

/// One `W`-block update from `state`.
pub fn update_w(state: &ModelState, data: &Dataset, hp: &Hyperparams) -> Result<WStep> {
    state.check_consistent(data)?;
    hp.validate(data.shape())?;
    let ws = Workspace::new(data);
    let alpha0 = ws.initial_step(hp);
    ws.update_w(state, hp, alpha0)
}

/// One `z`-block update, using `state.w` as the already-updated `W`.
pub fn update_z(state: &ModelState, data: &Dataset, hp: &Hyperparams) -> Result<Vector> {
    state.check_consistent(data)?;
    Ok(Workspace::new(data).update_z(&state.w, state.b, &state.z, hp))
}

/// One `b`-block update, using `state.w` and `state.z` as already updated.
pub fn update_b(state: &ModelState, data: &Dataset, hp: &Hyperparams) -> Result<f64> {
    state.check_consistent(data)?;
    Ok(Workspace::new(data).update_b(&state.w, &state.z, state.b, hp))
}

fn relative(step: f64, scale: f64) -> f64 {
    step / scale.max(1.0)
}

/// Runs the alternating minimization from `init` (default
/// [`ModelState::initial`]).
pub fn fit(data: &Dataset, hp: &Hyperparams, init: Option<ModelState>) -> Result<FitResult> {
    let started = Instant::now();
    data.check_trainable()?;
    hp.validate(data.shape())?;
    let mut state = match init {
        Some(s) => {
            s.check_consistent(data)?;
            linalg::ensure_finite(&s.w, "initial W")?;
            s
        }
        None => ModelState::initial(data),
    };
    if linalg::numerical_rank(&state.w)? > hp.rank {
        state.w = linalg::project_rank(&state.w, hp.rank)?.matrix;
    }

    let ws = Workspace::new(data);
    let alpha0 = ws.initial_step(hp);
    // The decrease guarantee only holds for backtracking with exact z-steps.
    let enforce_decrease =
        matches!(hp.step_policy, StepPolicy::Backtracking { .. }) && hp.z_update == ZUpdate::Exact;
    let tau_min = hp.tau_min();

    let mut objective = ws.objective(&state.w, &state.z, state.b, hp);
    let mut records = vec![IterRecord {
        iter: state.iter,
        objective,
        w_step_norm: 0.0,
        z_step_norm: 0.0,
        b_step: 0.0,
        halvings: 0,
        stalled: false,
        decrease_margin: 0.0,
    }];
    let mut status = Status::MaxIter;

    for _ in 0..hp.maxit {
        let k = state.iter + 1;
        let wstep = ws.update_w(&state, hp, alpha0)?;
        let z = ws.update_z(&wstep.w, state.b, &state.z, hp);
        let b = ws.update_b(&wstep.w, &z, state.b, hp);
        let next = ws.objective(&wstep.w, &z, b, hp);
        if !next.is_finite() || !b.is_finite() {
            return Err(Error::Numerical {
                iter: k,
                reason: "objective is not finite".into(),
            });
        }

        let dw = (&wstep.w - &state.w).norm();
        let dz = (&z - &state.z).norm();
        let db = (b - state.b).abs();
        let margin = (objective - next) - 0.5 * tau_min * (dw * dw + dz * dz + db * db);
        if enforce_decrease && margin < -DECREASE_SLACK {
            return Err(Error::DescentViolation {
                iter: k,
                excess: -margin,
            });
        }
        records.push(IterRecord {
            iter: k,
            objective: next,
            w_step_norm: dw,
            z_step_norm: dz,
            b_step: db,
            halvings: wstep.halvings,
            stalled: wstep.stalled,
            decrease_margin: margin,
        });

        let converged = relative(dw, state.w.norm()) <= hp.tol_step
            && (objective - next).abs() <= hp.tol_obj
            && relative(dz, state.z.norm()) <= hp.tol_step
            && relative(db, state.b.abs()) <= hp.tol_step;
        let frozen = wstep.stalled && dz == 0.0 && db == 0.0;

        state = ModelState {
            w: wstep.w,
            b,
            z,
            iter: k,
        };
        objective = next;
        if converged || frozen {
            status = Status::Converged;
            break;
        }
    }

    Ok(FitResult {
        model: state,
        trace: SolverTrace { records, status },
        hyperparams_echo: hp.clone(),
        wall_time: started.elapsed().as_secs_f64(),
    })
}
