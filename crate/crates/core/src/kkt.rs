//! Stationarity diagnostics for a point of the penalized problem.
//!
//! The constraint operator is written as `𝒜(W)_i = ⟨A_i, W⟩` with
//! `A_i = −y_i X_i`, so the coupling reads `z = 1 + 𝒜(W) − b y` and the
//! adjoint is `𝒜*(λ) = Σ λ_i A_i`. The multiplier comes from the penalty
//! gradient, `λ = −2σ (z − v)`, which makes `W + 𝒜*(λ)` equal to `∇h(W)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Vector};
use crate::model::{margin_residuals, Dataset, Hyperparams, ModelState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    pub lambda: Vec<f64>,
    pub w_residual: f64,
    pub z_residual: f64,
    pub b_residual: f64,
    /// `‖z − v‖`. Scales like `O(1/σ)` in the penalty form rather than vanishing.
    pub feasibility_residual: f64,
    pub rank_at_solution: usize,
    pub rank_deficient: bool,
    /// `σ_r ≈ σ_{r+1}` at the solution.
    pub projection_ambiguous: bool,
}

impl KktReport {
    /// Flat `key = value` block, one line per scalar field.
    pub fn to_key_values(&self) -> String {
        format!(
            "w_residual = {:e}\nz_residual = {:e}\nb_residual = {:e}\n\
             feasibility_residual = {:e}\nrank_at_solution = {}\nrank_deficient = {}\n\
             projection_ambiguous = {}\n",
            self.w_residual,
            self.z_residual,
            self.b_residual,
            self.feasibility_residual,
            self.rank_at_solution,
            self.rank_deficient,
            self.projection_ambiguous
        )
    }
}

/// `𝒜(W)_i = −y_i⟨W, X_i⟩`.
pub fn apply_operator(w: &Matrix, data: &Dataset) -> Result<Vector> {
    data.check_shape(w.shape())?;
    Ok(Vector::from_iterator(
        data.len(),
        data.samples().iter().map(|s| -s.y.value() * w.dot(&s.x)),
    ))
}

/// `𝒜*(λ) = Σ λ_i (−y_i X_i)`.
pub fn apply_adjoint(lambda: &Vector, data: &Dataset) -> Result<Matrix> {
    check_len(lambda.len(), data)?;
    let (p, q) = data.shape();
    let mut out = Matrix::zeros(p, q);
    for (l, s) in lambda.iter().zip(data.samples()) {
        out -= &s.x * (l * s.y.value());
    }
    Ok(out)
}

fn check_len(n: usize, data: &Dataset) -> Result<()> {
    if n != data.len() {
        return Err(Error::invalid_arg(format!(
            "vector of length {n} for {} samples",
            data.len()
        )));
    }
    Ok(())
}

/// `λ_i = −2σ (z_i − 1 + y_i(⟨W, X_i⟩ + b))`.
pub fn estimate_multiplier(state: &ModelState, data: &Dataset, sigma: f64) -> Result<Vector> {
    state.check_consistent(data)?;
    let v = margin_residuals(&state.w, state.b, data)?;
    Ok((&state.z - v) * (-2.0 * sigma))
}

/// Largest violation of `λ ∈ β ∂‖z₊‖₀(z)`: `|λ_i|` where `z_i ≠ 0` and
/// `max(0, −λ_i)` where `z_i = 0`. Entries with `|z_i| ≤ tol` count as zero.
pub fn z_stationarity(z: &Vector, lambda: &Vector, beta: f64, tol: f64) -> Result<f64> {
    if z.len() != lambda.len() {
        return Err(Error::invalid_arg("z and lambda lengths differ"));
    }
    // At z_i = 0 the requirement is λ_i = β d_i for some d_i ≥ 0, a sign
    // condition that does not depend on the size of β.
    let _ = beta;
    Ok(z.iter()
        .zip(lambda.iter())
        .map(|(&zi, &li)| {
            if zi.abs() > tol {
                li.abs()
            } else {
                (-li).max(0.0)
            }
        })
        .fold(0.0, f64::max))
}

/// Distance of `G = W + 𝒜*(λ)` from the normal cone of the rank-`r` set at `W`.
///
/// Below rank `r` the cone is `{0}` and the residual is `‖G‖_F`. At rank `r`
/// the cone is `{U_{Γ⊥} D V_{Γ⊥}ᵀ}` and the residual is the norm of `G` minus
/// its projection `U_{Γ⊥}U_{Γ⊥}ᵀ G V_{Γ⊥}V_{Γ⊥}ᵀ`.
pub fn w_stationarity(
    state: &ModelState,
    lambda: &Vector,
    data: &Dataset,
    r: usize,
) -> Result<f64> {
    data.check_shape(state.w.shape())?;
    let g = &state.w + apply_adjoint(lambda, data)?;
    let f = linalg::svd(&state.w)?;
    if f.rank() < r {
        return Ok(g.norm());
    }
    Ok((&g - normal_cone_projection(&f, &g)).norm())
}

/// `U_{Γ⊥}U_{Γ⊥}ᵀ G V_{Γ⊥}V_{Γ⊥}ᵀ`.
pub fn normal_cone_projection(f: &linalg::SvdFactors, g: &Matrix) -> Matrix {
    let up = f.u_perp();
    let vp = f.v_perp();
    &up * (up.transpose() * g * &vp) * vp.transpose()
}

/// Assembles all residuals at `state`; `tol` decides which `z_i` count as zero.
pub fn kkt_report(
    state: &ModelState,
    data: &Dataset,
    hp: &Hyperparams,
    tol: f64,
) -> Result<KktReport> {
    state.check_consistent(data)?;
    let lambda = estimate_multiplier(state, data, hp.sigma)?;
    let v = margin_residuals(&state.w, state.b, data)?;
    let w_residual = w_stationarity(state, &lambda, data, hp.rank)?;
    let z_residual = z_stationarity(&state.z, &lambda, hp.beta, tol)?;
    let y = data.labels();
    let b_residual = (2.0 * hp.sigma * y.dot(&(&state.z - &v))).abs();
    let feasibility_residual = (&state.z - &v).norm();
    let f = linalg::svd(&state.w)?;
    let rank = f.rank();
    let projection_ambiguous = rank >= hp.rank
        && hp.rank < f.sigma.len()
        && f.sigma[0] > 0.0
        && f.sigma[hp.rank - 1] - f.sigma[hp.rank] <= linalg::AMBIGUITY_TOL_REL * f.sigma[0];
    Ok(KktReport {
        lambda: lambda.iter().copied().collect(),
        w_residual,
        z_residual,
        b_residual,
        feasibility_residual,
        rank_at_solution: rank,
        rank_deficient: rank < hp.rank,
        projection_ambiguous,
    })
}
