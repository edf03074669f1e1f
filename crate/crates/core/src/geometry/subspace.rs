//! Orthonormal bases, rank decisions and principal-angle distances.
//!
//! All rank decisions in the crate use modified Gram–Schmidt with the single
//! threshold [`RANK_TOL`], applied relative to `max(1, |v|)`.

use nalgebra::{DMatrix, DVector};

use crate::scalar::Real;

pub const RANK_TOL: f64 = 1e-10;

/// Modified Gram–Schmidt (two passes) on the columns of `vectors`.
///
/// Columns whose residual falls below `RANK_TOL * max(1, |v|)` are dropped; the
/// result has `rank` orthonormal columns.
pub fn orthonormalize<T: Real>(vectors: &DMatrix<T>) -> DMatrix<T> {
    let m = vectors.nrows();
    let mut basis: Vec<DVector<T>> = Vec::new();
    let tol = T::c(RANK_TOL);
    for col in vectors.column_iter() {
        let original = col.norm();
        let mut v: DVector<T> = col.into_owned();
        for _ in 0..2 {
            for q in &basis {
                let proj = q.dot(&v);
                v.axpy(-proj, q, T::one());
            }
        }
        let n = v.norm();
        if n > tol * original.max(T::one()) {
            basis.push(v / n);
        }
    }
    let mut out = DMatrix::zeros(m, basis.len());
    for (j, q) in basis.iter().enumerate() {
        out.set_column(j, q);
    }
    out
}

pub fn rank<T: Real>(vectors: &DMatrix<T>) -> usize {
    orthonormalize(vectors).ncols()
}

/// Orthonormal basis of the orthogonal complement of `span(vectors)` in `R^m`.
pub fn complement<T: Real>(vectors: &DMatrix<T>) -> DMatrix<T> {
    let m = vectors.nrows();
    let q = orthonormalize(vectors);
    let r = q.ncols();
    let stacked = DMatrix::from_fn(m, r + m, |i, j| {
        if j < r {
            q[(i, j)]
        } else if i == j - r {
            T::one()
        } else {
            T::zero()
        }
    });
    let full = orthonormalize(&stacked);
    full.columns(r, full.ncols() - r).into_owned()
}

/// Largest singular value of `a`.
pub fn spectral_norm<T: Real>(a: &DMatrix<T>) -> T {
    if a.ncols() == 0 || a.nrows() == 0 {
        return T::zero();
    }
    let gram = a.transpose() * a;
    let eig = nalgebra::SymmetricEigen::new(gram);
    eig.eigenvalues
        .iter()
        .fold(T::zero(), |acc, &v| acc.max(v))
        .max(T::zero())
        .sqrt()
}

/// Sine of the largest principal angle between `span(a)` and `span(b)`.
///
/// Spaces of different dimension are at distance one.
pub fn subspace_distance<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> T {
    let qa = orthonormalize(a);
    let qb = orthonormalize(b);
    if qa.ncols() != qb.ncols() {
        return T::one();
    }
    if qa.ncols() == 0 {
        return T::zero();
    }
    let residual = &qa - &qb * (qb.transpose() * &qa);
    spectral_norm(&residual).min(T::one())
}

/// Largest norm of the component of any column of `vectors` outside `span(basis)`.
pub fn projection_residual<T: Real>(basis: &DMatrix<T>, vectors: &DMatrix<T>) -> T {
    let q = orthonormalize(basis);
    let residual = vectors - &q * (q.transpose() * vectors);
    residual
        .column_iter()
        .fold(T::zero(), |acc, c| acc.max(c.norm()))
}

/// Concatenates two column blocks.
pub fn hstack<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    let mut out = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}
