//! Low-rank separable generator with known ground truth.

use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::{Dataset, Label, MatrixSample};
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub p: usize,
    pub q: usize,
    pub rank: usize,
    pub samples: usize,
    pub bias: f64,
    /// Draws with `|⟨W*, X⟩ + b*|` below this are discarded and redrawn.
    pub min_margin: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            p: 8,
            q: 6,
            rank: 2,
            samples: 200,
            bias: 0.1,
            min_margin: 0.5,
            seed: 1,
        }
    }
}

fn gaussian(rng: &mut rng::Rng, rows: usize, cols: usize) -> Matrix {
    let mut m = Matrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = rng.sample(StandardNormal);
        }
    }
    m
}

/// `W* = U Vᵀ` with standard normal factors, `X_i` standard normal and
/// `y_i = sign(⟨W*, X_i⟩ + b*)`. Returns the dataset and `W*`.
pub fn generate(spec: &SyntheticSpec) -> Result<(Dataset, Matrix)> {
    if spec.samples == 0 || spec.p == 0 || spec.q == 0 {
        return Err(Error::invalid_arg(
            "synthetic dataset needs a non-empty shape",
        ));
    }
    let mut rng = rng::seeded(spec.seed);
    let u = gaussian(&mut rng, spec.p, spec.rank);
    let v = gaussian(&mut rng, spec.q, spec.rank);
    let w_star = &u * v.transpose();
    let mut samples = Vec::with_capacity(spec.samples);
    let mut draws = 0usize;
    while samples.len() < spec.samples {
        draws += 1;
        if draws > 1000 * spec.samples {
            return Err(Error::invalid_arg(
                "margin filter rejects nearly every draw; lower min_margin",
            ));
        }
        let x = gaussian(&mut rng, spec.p, spec.q);
        let score = w_star.dot(&x) + spec.bias;
        if score.abs() < spec.min_margin {
            continue;
        }
        let y = if score > 0.0 { Label::Pos } else { Label::Neg };
        samples.push(MatrixSample { x, y });
    }
    let name = format!("synthetic-{}x{}-r{}", spec.p, spec.q, spec.rank);
    let provenance = format!(
        "synthetic(p={}, q={}, rank={}, m={}, bias={}, min_margin={}, seed={})",
        spec.p, spec.q, spec.rank, spec.samples, spec.bias, spec.min_margin, spec.seed
    );
    Ok((Dataset::new(samples, name, provenance)?, w_star))
}
