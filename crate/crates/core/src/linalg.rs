//! Dense linear algebra: SVD with full orthonormal bases, rank-`r`
//! projection and the Frobenius inner product.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Relative cut-off below which a singular value counts as zero.
pub const ZERO_TOL_REL: f64 = 1e-12;

/// Relative gap `σ_r − σ_{r+1} ≤ AMBIGUITY_TOL_REL·σ_1` that marks a
/// set-valued rank projection.
pub const AMBIGUITY_TOL_REL: f64 = 1e-10;

/// Singular value decomposition `W = U diag(σ) Vᵀ` with square orthonormal
/// `U` (p×p) and `V` (q×q).
///
/// Only the leading `min(p, q)` columns of `U` and `V` pair with singular
/// values. The trailing columns complete the bases so that the orthogonal
/// complements `U_{Γ⊥}`, `V_{Γ⊥}` of the singular subspaces are available.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub u: Matrix,
    pub sigma: Vector,
    pub v: Matrix,
    /// Indices `i` with `σ_i > zero_tol`. Always a prefix `0..rank` since
    /// `sigma` is sorted.
    pub gamma: Vec<usize>,
}

impl SvdFactors {
    /// Zero tolerance `1e-12·σ_1` (zero for the zero matrix).
    pub fn zero_tol(&self) -> f64 {
        self.sigma.get(0).map_or(0.0, |s1| ZERO_TOL_REL * s1)
    }

    pub fn rank(&self) -> usize {
        self.gamma.len()
    }

    /// Columns of `U` outside `Γ` (p × (p − rank)).
    pub fn u_perp(&self) -> Matrix {
        let k = self.rank();
        self.u.columns(k, self.u.ncols() - k).into_owned()
    }

    /// Columns of `V` outside `Γ` (q × (q − rank)).
    pub fn v_perp(&self) -> Matrix {
        let k = self.rank();
        self.v.columns(k, self.v.ncols() - k).into_owned()
    }

    pub fn u_gamma(&self) -> Matrix {
        self.u.columns(0, self.rank()).into_owned()
    }

    pub fn v_gamma(&self) -> Matrix {
        self.v.columns(0, self.rank()).into_owned()
    }

    /// `U diag(σ_1..σ_r, 0, ..) Vᵀ`.
    pub fn truncated(&self, r: usize) -> Matrix {
        let (p, q) = (self.u.nrows(), self.v.nrows());
        let r = r.min(self.sigma.len());
        let mut out = Matrix::zeros(p, q);
        for i in 0..r {
            let s = self.sigma[i];
            if s == 0.0 {
                break;
            }
            out += s * self.u.column(i) * self.v.column(i).transpose();
        }
        out
    }
}

pub(crate) fn ensure_finite(w: &Matrix, what: &str) -> Result<()> {
    if w.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{what} contains NaN or infinite entries"
        )))
    }
}

/// Extends an orthonormal `n×k` block to an orthonormal `n×n` basis whose first
/// `k` columns are the block itself.
fn complete_basis(thin: &Matrix) -> Matrix {
    let (n, k) = thin.shape();
    if k >= n {
        return thin.columns(0, n).into_owned();
    }
    let mut stacked = Matrix::zeros(n, k + n);
    stacked.columns_mut(0, k).copy_from(thin);
    stacked.columns_mut(k, n).fill_with_identity();
    let q = stacked.qr().q();
    let mut full = Matrix::zeros(n, n);
    full.columns_mut(0, k).copy_from(thin);
    full.columns_mut(k, n - k).copy_from(&q.columns(k, n - k));
    full
}

/// One-sided (Hestenes) Jacobi SVD of a tall matrix (`m ≥ n`).
///
/// Returns the rotated columns `A·V` (column norms are the singular values)
/// and the accumulated `n×n` rotation `V`. nalgebra's bidiagonal SVD is not
/// used: it returns inaccurate factors on rank-deficient inputs, which is
/// exactly what the solver feeds back after each projection.
fn jacobi_tall(a: &Matrix) -> (Matrix, Matrix) {
    const MAX_SWEEPS: usize = 80;
    let n = a.ncols();
    let mut u = a.clone();
    let mut v = Matrix::identity(n, n);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let alpha = u.column(i).norm_squared();
                let beta = u.column(j).norm_squared();
                let gamma = u.column(i).dot(&u.column(j));
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for m in [&mut u, &mut v] {
                    for k in 0..m.nrows() {
                        let (x, y) = (m[(k, i)], m[(k, j)]);
                        m[(k, i)] = c * x - s * y;
                        m[(k, j)] = s * x + c * y;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    (u, v)
}

pub fn svd(w: &Matrix) -> Result<SvdFactors> {
    ensure_finite(w, "matrix")?;
    let (p, q) = w.shape();
    if p == 0 || q == 0 {
        return Err(Error::invalid_arg("svd of an empty matrix"));
    }
    let tall = p >= q;
    let (av, right) = if tall {
        jacobi_tall(w)
    } else {
        jacobi_tall(&w.transpose())
    };
    let k = av.ncols();
    let norms: Vec<f64> = (0..k).map(|i| av.column(i).norm()).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));
    let sigma = Vector::from_iterator(k, order.iter().map(|&i| norms[i]));
    let zero_tol = sigma[0] * ZERO_TOL_REL;
    let gamma: Vec<usize> = (0..k).filter(|&i| sigma[i] > zero_tol).collect();

    // Left vectors only for nonzero singular values; the rest come from completion.
    let mut left = Matrix::zeros(av.nrows(), gamma.len());
    for (c, &i) in gamma.iter().enumerate() {
        left.set_column(c, &(av.column(order[i]) / sigma[i]));
    }
    let mut right_sorted = Matrix::zeros(k, k);
    for (c, &i) in order.iter().enumerate() {
        right_sorted.set_column(c, &right.column(i));
    }
    let left = complete_basis(&left);
    let (u, v) = if tall {
        (left, right_sorted)
    } else {
        (right_sorted, left)
    };
    Ok(SvdFactors { u, sigma, v, gamma })
}

/// Rank of `w` under the relative zero tolerance.
pub fn numerical_rank(w: &Matrix) -> Result<usize> {
    ensure_finite(w, "matrix")?;
    if w.is_empty() {
        return Ok(0);
    }
    Ok(svd(w)?.rank())
}

/// Result of projecting onto `{W : rank(W) ≤ r}`.
#[derive(Debug, Clone)]
pub struct RankProjection {
    pub matrix: Matrix,
    /// The projection is set-valued here (`σ_r ≈ σ_{r+1}`); `matrix` is the
    /// member picked by the SVD ordering.
    pub ambiguous: bool,
}

pub(crate) fn check_rank_bound(shape: (usize, usize), r: usize) -> Result<()> {
    let lim = shape.0.min(shape.1);
    if r == 0 || r >= lim {
        return Err(Error::invalid_arg(format!(
            "rank bound r = {r} must satisfy 1 <= r < min(p, q) = {lim}"
        )));
    }
    Ok(())
}

/// Keeps the `r` largest singular values of `w` and zeroes the rest.
pub fn project_rank(w: &Matrix, r: usize) -> Result<RankProjection> {
    check_rank_bound(w.shape(), r)?;
    let f = svd(w)?;
    let s1 = f.sigma[0];
    let ambiguous = s1 > 0.0 && f.sigma[r - 1] - f.sigma[r] <= AMBIGUITY_TOL_REL * s1;
    Ok(RankProjection {
        matrix: f.truncated(r),
        ambiguous,
    })
}

/// `tr(aᵀb)`.
pub fn fro_inner(a: &Matrix, b: &Matrix) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch {
            expected: a.shape(),
            found: b.shape(),
        });
    }
    Ok(a.dot(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rng: &mut ChaCha8Rng, p: usize, q: usize) -> Matrix {
        Matrix::from_fn(p, q, |_, _| rng.random_range(-1.0..1.0))
    }

    fn orthonormality_gap(m: &Matrix) -> f64 {
        let n = m.ncols();
        (m.transpose() * m - Matrix::identity(n, n)).abs().max()
    }

    #[test]
    fn diagonal_svd() {
        let w = Matrix::from_diagonal(&Vector::from_vec(vec![3.0, 2.0, 1.0]));
        let f = svd(&w).unwrap();
        assert_relative_eq!(
            f.sigma,
            Vector::from_vec(vec![3.0, 2.0, 1.0]),
            epsilon = 1e-14
        );
        // u and v equal I up to column signs
        for i in 0..3 {
            assert_relative_eq!(f.u[(i, i)].abs(), 1.0, epsilon = 1e-14);
            assert_relative_eq!(f.u[(i, i)] * f.v[(i, i)], 1.0, epsilon = 1e-14);
        }
        assert_eq!(f.gamma, vec![0, 1, 2]);
    }

    #[test]
    fn zero_matrix_has_empty_gamma() {
        let f = svd(&Matrix::zeros(2, 3)).unwrap();
        assert_eq!(f.sigma.as_slice(), &[0.0, 0.0]);
        assert!(f.gamma.is_empty());
        assert_eq!(f.zero_tol(), 0.0);
        assert!(orthonormality_gap(&f.u) < 1e-12);
        assert!(orthonormality_gap(&f.v) < 1e-12);
    }

    #[test]
    fn reconstruction_and_orthonormality() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for &(p, q) in &[(5, 4), (4, 5), (7, 3), (1, 6), (6, 6)] {
            let m = random(&mut rng, p, q);
            let f = svd(&m).unwrap();
            assert_eq!(f.u.shape(), (p, p));
            assert_eq!(f.v.shape(), (q, q));
            let k = p.min(q);
            let mut s = Matrix::zeros(p, q);
            for i in 0..k {
                s[(i, i)] = f.sigma[i];
            }
            let rel = (&f.u * s * f.v.transpose() - &m).norm() / m.norm();
            assert!(rel <= 1e-10, "reconstruction {rel}");
            assert!(orthonormality_gap(&f.u) <= 1e-10);
            assert!(orthonormality_gap(&f.v) <= 1e-10);
            assert!(f.sigma.iter().all(|&x| x >= 0.0));
            assert!(f.sigma.as_slice().windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn perp_blocks_are_orthogonal_to_singular_subspaces() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random(&mut rng, 6, 2);
        let b = random(&mut rng, 5, 2);
        let w = &a * b.transpose();
        let f = svd(&w).unwrap();
        assert_eq!(f.rank(), 2);
        assert!((f.u_gamma().transpose() * f.u_perp()).abs().max() < 1e-12);
        assert!((f.v_gamma().transpose() * f.v_perp()).abs().max() < 1e-12);
        assert!((w.transpose() * f.u_perp()).abs().max() < 1e-12);
    }

    #[test]
    fn non_finite_input_rejected() {
        let mut w = Matrix::zeros(2, 2);
        w[(0, 1)] = f64::NAN;
        assert!(matches!(svd(&w), Err(Error::InvalidInput(_))));
        w[(0, 1)] = f64::INFINITY;
        assert!(matches!(project_rank(&w, 1), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn diagonal_projection() {
        let w = Matrix::from_diagonal(&Vector::from_vec(vec![3.0, 2.0, 1.0]));
        let p = project_rank(&w, 2).unwrap();
        let expected = Matrix::from_diagonal(&Vector::from_vec(vec![3.0, 2.0, 0.0]));
        assert_relative_eq!(p.matrix, expected, epsilon = 1e-14);
        assert_relative_eq!((&w - &p.matrix).norm(), 1.0, epsilon = 1e-14);
        assert!(!p.ambiguous);
    }

    #[test]
    fn rank_bound_checked() {
        let w = Matrix::zeros(3, 4);
        assert!(matches!(
            project_rank(&w, 0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            project_rank(&w, 3),
            Err(Error::InvalidArgument(_))
        ));
        assert!(project_rank(&w, 2).is_ok());
    }

    #[test]
    fn low_rank_matrix_is_fixed_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let w = random(&mut rng, 6, 2) * random(&mut rng, 5, 2).transpose();
        let p = project_rank(&w, 3).unwrap();
        assert!((&p.matrix - &w).norm() <= 1e-12 * w.norm());
        let p2 = project_rank(&w, 2).unwrap();
        assert!((&p2.matrix - &w).norm() <= 1e-12 * w.norm());
    }

    #[test]
    fn tie_is_flagged() {
        let w = Matrix::from_diagonal(&Vector::from_vec(vec![2.0, 1.0, 1.0]));
        assert!(project_rank(&w, 2).unwrap().ambiguous);
        assert!(!project_rank(&w, 1).unwrap().ambiguous);
    }

    /// Eckart–Young by sampling: no random rank-2 matrix of matched scale beats
    /// the truncated SVD in Frobenius distance.
    #[test]
    fn projection_beats_random_rank_r_candidates() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let w = random(&mut rng, 6, 5);
        let best = (&w - project_rank(&w, 2).unwrap().matrix).norm();
        let scale = w.norm() / 2.0;
        for _ in 0..10_000 {
            let c = random(&mut rng, 6, 2) * random(&mut rng, 5, 2).transpose();
            let c = &c * (scale / c.norm().max(1e-300) * rng.random_range(0.2..2.0));
            assert!((&w - &c).norm() >= best);
        }
    }

    #[test]
    fn rank_deficient_inputs_recompose() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let (p, q) = (rng.random_range(2..21), rng.random_range(2..16));
            let k = rng.random_range(1..p.min(q));
            let w = random(&mut rng, p, k) * random(&mut rng, q, k).transpose();
            let f = svd(&w).unwrap();
            let mut s = Matrix::zeros(p, q);
            for i in 0..f.sigma.len() {
                s[(i, i)] = f.sigma[i];
            }
            assert!((&f.u * s * f.v.transpose() - &w).norm() <= 1e-12 * w.norm());
            assert!((f.u.transpose() * &f.u - Matrix::identity(p, p)).norm() <= 1e-12);
            assert!((f.v.transpose() * &f.v - Matrix::identity(q, q)).norm() <= 1e-12);
            assert_eq!(f.rank(), k);
        }
    }

    #[test]
    fn residual_identity_and_idempotence() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w = random(&mut rng, 9, 7);
        let f = svd(&w).unwrap();
        for r in 1..6 {
            let p = project_rank(&w, r).unwrap().matrix;
            let tail: f64 = f.sigma.iter().skip(r).map(|s| s * s).sum();
            assert!(((&w - &p).norm_squared() - tail).abs() <= 1e-9 * w.norm_squared());
            assert_eq!(numerical_rank(&p).unwrap(), r);
            let pp = project_rank(&p, r).unwrap().matrix;
            assert!((&pp - &p).norm() <= 1e-10, "r={r} {}", (&pp - &p).norm());
        }
    }

    #[test]
    fn fro_inner_cases() {
        let i2 = Matrix::identity(2, 2);
        assert_eq!(fro_inner(&i2, &i2).unwrap(), 2.0);
        assert_eq!(fro_inner(&i2, &Matrix::zeros(2, 2)).unwrap(), 0.0);
        let a = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let b = Matrix::from_row_slice(2, 2, &[5.0, 6.0, 7.0, 8.0]);
        assert_eq!(fro_inner(&a, &b).unwrap(), 70.0);
        assert_eq!(fro_inner(&b, &a).unwrap(), 70.0);
        assert!(matches!(
            fro_inner(&a, &Matrix::zeros(2, 3)),
            Err(Error::ShapeMismatch { .. })
        ));
    }
}
