//! Symplectic form, elementary symplectic matrices and the symplectic spectrum.

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// The 2×2 rotation `X' = cosφ·X − sinφ·Y`, `Y' = sinφ·X + cosφ·Y`.
pub fn rotation<T: Real>(phi: T) -> [[T; 2]; 2] {
    let (s, c) = phi.sin_cos();
    [[c, -s], [s, c]]
}

/// Block-diagonal symplectic form with blocks `[[0, 1], [-1, 0]]`.
pub fn omega<T: Real>(modes: usize) -> DMatrix<T> {
    let mut m = DMatrix::zeros(2 * modes, 2 * modes);
    for k in 0..modes {
        m[(2 * k, 2 * k + 1)] = T::one();
        m[(2 * k + 1, 2 * k)] = -T::one();
    }
    m
}

/// Phase rotation of mode `k` as a `2N×2N` matrix.
pub fn phase_shift_matrix<T: Real>(modes: usize, k: usize, phi: T) -> DMatrix<T> {
    let mut m = DMatrix::identity(2 * modes, 2 * modes);
    let r = rotation(phi);
    for a in 0..2 {
        for b in 0..2 {
            m[(2 * k + a, 2 * k + b)] = r[a][b];
        }
    }
    m
}

/// Real beam splitter mixing `a_j' = √T a_j + √(1−T) a_k`, `a_k' = √(1−T) a_j − √T a_k`.
pub fn mixing_matrix<T: Real>(modes: usize, j: usize, k: usize, transmissivity: T) -> DMatrix<T> {
    let t = transmissivity.sqrt();
    let r = (T::one() - transmissivity).sqrt();
    let mut m = DMatrix::identity(2 * modes, 2 * modes);
    for q in 0..2 {
        let (pj, pk) = (2 * j + q, 2 * k + q);
        m[(pj, pj)] = t;
        m[(pj, pk)] = r;
        m[(pk, pj)] = r;
        m[(pk, pk)] = -t;
    }
    m
}

/// Flips the sign of the `Y` quadrature of every mode in `subset`.
pub fn partial_transpose<T: Real>(cov: &DMatrix<T>, subset: &[usize]) -> DMatrix<T> {
    let mut out = cov.clone();
    for &k in subset {
        let row = 2 * k + 1;
        for c in 0..out.ncols() {
            out[(row, c)] = -out[(row, c)];
        }
        for r in 0..out.nrows() {
            out[(r, row)] = -out[(r, row)];
        }
    }
    out
}

/// Symplectic eigenvalues of a positive definite covariance, ascending.
///
/// With `Σ = LLᵀ`, the antisymmetric matrix `LᵀΩL` is similar to `ΩΣ`, so its
/// singular values are the symplectic eigenvalues, each appearing twice. They are
/// read off the symmetric eigenproblem of `(LᵀΩL)ᵀ(LᵀΩL)` and pair-collapsed.
pub fn symplectic_eigenvalues<T: Real>(cov: &DMatrix<T>) -> Result<Vec<T>> {
    let dim = cov.nrows();
    if !dim.is_multiple_of(2) || cov.ncols() != dim {
        return Err(Error::DimensionMismatch { expected: dim + dim % 2, found: cov.ncols() });
    }
    if dim == 0 {
        return Ok(Vec::new());
    }
    let chol = Cholesky::new(cov.clone()).ok_or_else(|| {
        Error::Numerical("covariance is not positive definite".into())
    })?;
    let l = chol.l();
    let a = l.transpose() * omega::<T>(dim / 2) * &l;
    let mut sq: Vec<T> = SymmetricEigen::new(a.transpose() * &a).eigenvalues.iter().copied().collect();
    sq.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));

    let scale = sq.last().copied().unwrap_or_else(T::one).max(T::one());
    let tol = T::tol(1e-9);
    let mut nus = Vec::with_capacity(dim / 2);
    for pair in sq.chunks(2) {
        let (lo, hi) = (pair[0].max(T::zero()), pair[1].max(T::zero()));
        if (hi - lo) > tol * scale {
            return Err(Error::Numerical(format!(
                "symplectic spectrum does not pair: {lo} vs {hi}"
            )));
        }
        nus.push(((lo + hi) / T::lit(2.0)).sqrt());
    }
    Ok(nus)
}
