//! Datasets, hyperparameters, model state and the penalized objective.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};

/// Binary class label, `+1` or `−1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "-1")]
    Neg,
    #[serde(rename = "+1")]
    Pos,
}

impl Label {
    pub fn value(self) -> f64 {
        match self {
            Label::Pos => 1.0,
            Label::Neg => -1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Label::Pos => 1,
            Label::Neg => -1,
        }
    }

    pub fn from_i8(v: i8) -> Option<Self> {
        match v {
            1 => Some(Label::Pos),
            -1 => Some(Label::Neg),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_i8())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSample {
    pub x: Matrix,
    pub y: Label,
}

impl MatrixSample {
    pub fn new(x: Matrix, y: Label) -> Result<Self> {
        linalg::ensure_finite(&x, "sample")?;
        Ok(MatrixSample { x, y })
    }
}

/// Ordered labeled samples sharing one `(p, q)` shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Vec<MatrixSample>,
    pub name: String,
    /// Source file and the transforms applied, in order.
    pub provenance: String,
}

impl Dataset {
    pub fn new(
        samples: Vec<MatrixSample>,
        name: impl Into<String>,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        let first = samples
            .first()
            .ok_or_else(|| Error::InvalidInput("dataset has no samples".into()))?;
        let shape = first.x.shape();
        if shape.0 == 0 || shape.1 == 0 {
            return Err(Error::InvalidInput("samples have an empty shape".into()));
        }
        if let Some(bad) = samples.iter().find(|s| s.x.shape() != shape) {
            return Err(Error::ShapeMismatch {
                expected: shape,
                found: bad.x.shape(),
            });
        }
        Ok(Dataset {
            samples,
            name: name.into(),
            provenance: provenance.into(),
        })
    }

    pub fn samples(&self) -> &[MatrixSample] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<MatrixSample> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.samples[0].x.shape()
    }

    pub fn labels(&self) -> Vector {
        Vector::from_iterator(self.len(), self.samples.iter().map(|s| s.y.value()))
    }

    /// `(#pos, #neg)`.
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.samples.iter().filter(|s| s.y == Label::Pos).count();
        (pos, self.len() - pos)
    }

    /// Training needs both classes present.
    pub fn check_trainable(&self) -> Result<()> {
        match self.class_counts() {
            (0, _) | (_, 0) => Err(Error::invalid_arg(format!(
                "dataset '{}' must contain both labels for training",
                self.name
            ))),
            _ => Ok(()),
        }
    }

    pub fn check_shape(&self, shape: (usize, usize)) -> Result<()> {
        if self.shape() != shape {
            return Err(Error::ShapeMismatch {
                expected: shape,
                found: self.shape(),
            });
        }
        Ok(())
    }

    /// Returns a copy with the samples in `order` (indices into `self`).
    pub fn subset(&self, order: &[usize], name: impl Into<String>) -> Result<Dataset> {
        let samples = order.iter().map(|&i| self.samples[i].clone()).collect();
        Dataset::new(samples, name, self.provenance.clone())
    }

    /// Same metadata, new samples.
    pub fn with_samples(&self, samples: Vec<MatrixSample>, transform: &str) -> Result<Dataset> {
        Dataset::new(
            samples,
            self.name.clone(),
            format!("{}; {}", self.provenance, transform),
        )
    }

    /// Stacks `vec(X_i)` (column-major) as the rows of an `m × pq` matrix.
    pub fn design_matrix(&self) -> Matrix {
        let (p, q) = self.shape();
        let mut a = Matrix::zeros(self.len(), p * q);
        for (i, s) in self.samples.iter().enumerate() {
            for (j, v) in s.x.iter().enumerate() {
                a[(i, j)] = *v;
            }
        }
        a
    }
}

/// Where the backtracking search starts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialStep {
    /// `1 / (1 + 2σ‖𝒜‖₂² + τ₁)`, the exact Lipschitz constant of `∇h` plus τ₁.
    Spectral,
    /// `1 / (1 + 2σ Σ‖X_i‖_F²)`, a cheaper and looser bound.
    Frobenius,
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum StepPolicy {
    Fixed {
        alpha: f64,
    },
    Backtracking {
        alpha0: InitialStep,
        shrink: f64,
        max_halvings: u32,
    },
}

impl Default for StepPolicy {
    fn default() -> Self {
        StepPolicy::Backtracking {
            alpha0: InitialStep::Spectral,
            shrink: 0.5,
            max_halvings: 30,
        }
    }
}

impl fmt::Display for StepPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepPolicy::Fixed { alpha } => write!(f, "fixed:{alpha}"),
            StepPolicy::Backtracking {
                alpha0: InitialStep::Spectral,
                ..
            } => write!(f, "backtracking"),
            StepPolicy::Backtracking {
                alpha0: InitialStep::Frobenius,
                ..
            } => write!(f, "backtracking:frobenius"),
            StepPolicy::Backtracking {
                alpha0: InitialStep::Value(a),
                ..
            } => write!(f, "backtracking:{a}"),
        }
    }
}

/// Constants used by the `z`-block update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZUpdate {
    /// Exact minimizer: center `(2σv + τ₂z)/(2σ + τ₂)`, threshold
    /// `√(2β/(2σ + τ₂))`.
    #[default]
    Exact,
    /// Center `(2σv + τ₂z)/(σ + τ₂)` and threshold `√(4β/(σ + τ₂))`, kept for
    /// comparison with the constants as originally printed.
    Paper,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub beta: f64,
    pub sigma: f64,
    pub rank: usize,
    pub tau1: f64,
    pub tau2: f64,
    pub tau3: f64,
    pub maxit: usize,
    pub tol_step: f64,
    pub tol_obj: f64,
    pub step_policy: StepPolicy,
    #[serde(default)]
    pub z_update: ZUpdate,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            beta: 0.1,
            sigma: 0.1,
            rank: 2,
            tau1: 1e-3,
            tau2: 1e-3,
            tau3: 1e-3,
            maxit: 1000,
            tol_step: 1e-6,
            tol_obj: 1e-8,
            step_policy: StepPolicy::default(),
            z_update: ZUpdate::Exact,
            seed: 1,
        }
    }
}

impl Hyperparams {
    /// Checks positivity constraints and `rank < min(p, q)`.
    pub fn validate(&self, shape: (usize, usize)) -> Result<()> {
        let positive = [
            ("beta", self.beta),
            ("sigma", self.sigma),
            ("tau1", self.tau1),
            ("tau2", self.tau2),
            ("tau3", self.tau3),
            ("tol_step", self.tol_step),
            ("tol_obj", self.tol_obj),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid_arg(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        linalg::check_rank_bound(shape, self.rank)?;
        match self.step_policy {
            StepPolicy::Fixed { alpha } if !(alpha > 0.0 && alpha.is_finite()) => Err(
                Error::invalid_arg(format!("step size must be positive, got {alpha}")),
            ),
            StepPolicy::Backtracking { shrink, .. } if !(shrink > 0.0 && shrink < 1.0) => Err(
                Error::invalid_arg(format!("shrink must lie in (0, 1), got {shrink}")),
            ),
            StepPolicy::Backtracking {
                alpha0: InitialStep::Value(a),
                ..
            } if !(a > 0.0 && a.is_finite()) => Err(Error::invalid_arg(format!(
                "initial step must be positive, got {a}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn tau_min(&self) -> f64 {
        self.tau1.min(self.tau2).min(self.tau3)
    }
}

/// The iterate `(W, z, b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    pub w: Matrix,
    pub b: f64,
    pub z: Vector,
    pub iter: usize,
}

impl ModelState {
    /// Default start: `W = 0`, `b = 0`, `z = min(v, 0) = 0`, i.e. zero
    /// Heaviside loss.
    ///
    /// The residual start [`ModelState::residual_start`] (`z = v = 1`) is a
    /// fixed point of the alternating scheme whenever `β ≤ σ + τ₂/2`.
    pub fn initial(data: &Dataset) -> Self {
        let (p, q) = data.shape();
        ModelState {
            w: Matrix::zeros(p, q),
            b: 0.0,
            z: Vector::zeros(data.len()),
            iter: 0,
        }
    }

    /// `W = 0`, `b = 0`, `z = 1`: the margin residuals of the zero model.
    pub fn residual_start(data: &Dataset) -> Self {
        ModelState {
            z: Vector::from_element(data.len(), 1.0),
            ..ModelState::initial(data)
        }
    }

    pub fn check_consistent(&self, data: &Dataset) -> Result<()> {
        data.check_shape(self.w.shape())?;
        if self.z.len() != data.len() {
            return Err(Error::invalid_arg(format!(
                "z has length {} but the dataset has {} samples",
                self.z.len(),
                data.len()
            )));
        }
        Ok(())
    }
}

/// `v_i = 1 − y_i(⟨W, X_i⟩ + b)` in dataset order.
pub fn margin_residuals(w: &Matrix, b: f64, data: &Dataset) -> Result<Vector> {
    data.check_shape(w.shape())?;
    Ok(Vector::from_iterator(
        data.len(),
        data.samples()
            .iter()
            .map(|s| 1.0 - s.y.value() * (w.dot(&s.x) + b)),
    ))
}

/// `‖z₊‖₀`: number of strictly positive entries.
pub fn heaviside_count(z: &Vector) -> usize {
    z.iter().filter(|&&v| v > 0.0).count()
}

/// `½‖W‖_F² + β‖z₊‖₀ + σ‖z − v(W, b)‖²`.
pub fn penalized_objective(state: &ModelState, data: &Dataset, hp: &Hyperparams) -> Result<f64> {
    state.check_consistent(data)?;
    let v = margin_residuals(&state.w, state.b, data)?;
    Ok(0.5 * state.w.norm_squared()
        + hp.beta * heaviside_count(&state.z) as f64
        + hp.sigma * (&state.z - v).norm_squared())
}

/// Scalar hard threshold on the positive side: zero on `(0, threshold]`,
/// identity elsewhere.
#[inline]
pub fn hard_threshold_positive(x: f64, threshold: f64) -> f64 {
    if x > 0.0 && x <= threshold {
        0.0
    } else {
        x
    }
}

/// Proximal operator of `γ‖(·)₊‖₀`, applied coordinate-wise with threshold
/// `√(2γ)`. The boundary `x_i = √(2γ)` maps to zero.
pub fn prox_heaviside(x: &Vector, gamma: f64) -> Result<Vector> {
    if gamma.is_nan() || gamma <= 0.0 {
        return Err(Error::invalid_arg(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidInput("prox argument is not finite".into()));
    }
    let t = (2.0 * gamma).sqrt();
    Ok(x.map(|v| hard_threshold_positive(v, t)))
}

pub fn decision_score(w: &Matrix, b: f64, x: &Matrix) -> Result<f64> {
    Ok(linalg::fro_inner(w, x)? + b)
}

/// `+1` when `⟨W, X⟩ + b > 0`, otherwise `−1` (a zero score is negative).
pub fn predict(w: &Matrix, b: f64, x: &Matrix) -> Result<Label> {
    Ok(if decision_score(w, b, x)? > 0.0 {
        Label::Pos
    } else {
        Label::Neg
    })
}
