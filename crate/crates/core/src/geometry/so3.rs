//! Closed forms for SO(3) in exponential coordinates.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::group::{LieGroupSpec, MatrixGroup};
use crate::scalar::Real;

/// Exponential coordinates are restricted to `|theta| < pi - 0.1`.
pub const CHART_MARGIN: f64 = 0.1;

pub fn hat<T: Real>(v: &DVector<T>) -> DMatrix<T> {
    let z = T::zero();
    DMatrix::from_row_slice(3, 3, &[z, -v[2], v[1], v[2], z, -v[0], -v[1], v[0], z])
}

pub fn vee<T: Real>(m: &DMatrix<T>) -> DVector<T> {
    DVector::from_vec(vec![m[(2, 1)], m[(0, 2)], m[(1, 0)]])
}

/// Rodrigues formula applied to an algebra matrix.
pub fn exp_matrix<T: Real>(alg: &DMatrix<T>) -> DMatrix<T> {
    let w = vee(alg);
    let theta = w.norm();
    let k = alg;
    let k2 = k * k;
    let (a, b) = if theta < T::c(1e-4) {
        let t2 = theta * theta;
        (
            T::one() - t2 / T::c(6.0) + t2 * t2 / T::c(120.0),
            T::c(0.5) - t2 / T::c(24.0) + t2 * t2 / T::c(720.0),
        )
    } else {
        (
            theta.sin() / theta,
            (T::one() - theta.cos()) / (theta * theta),
        )
    };
    DMatrix::identity(3, 3) + k * a + k2 * b
}

/// Principal logarithm of a rotation matrix, as an algebra matrix.
pub fn log_matrix<T: Real>(r: &DMatrix<T>) -> DMatrix<T> {
    let cos = ((r.trace() - T::one()) * T::c(0.5)).clamp(-T::one(), T::one());
    let theta = cos.acos();
    let skew = (r - r.transpose()) * T::c(0.5);
    if theta < T::c(1e-4) {
        let t2 = theta * theta;
        return skew * (T::one() + t2 / T::c(6.0) + T::c(7.0) * t2 * t2 / T::c(360.0));
    }
    if T::pi() - theta > T::c(1e-3) {
        return skew * (theta / theta.sin());
    }
    // Near pi the skew part carries no usable information; recover the axis
    // from the symmetric part, which tends to n n^T.
    let sym = ((r + r.transpose()) * T::c(0.5) + DMatrix::identity(3, 3)) * T::c(0.5);
    let mut best = 0;
    for i in 1..3 {
        if sym[(i, i)] > sym[(best, best)] {
            best = i;
        }
    }
    let mut axis = sym.column(best).into_owned();
    axis /= axis.norm();
    let s = vee(&skew);
    if s.dot(&axis) < T::zero() {
        axis = -axis;
    }
    hat(&(axis * theta))
}

/// Inverse right Jacobian: `exp(theta) exp(eps e) = exp(theta + eps J_r^{-1}(theta) e + O(eps^2))`.
pub fn right_jacobian_inverse<T: Real>(theta: &DVector<T>) -> DMatrix<T> {
    let t = theta.norm();
    let k = hat(theta);
    let coeff = if t < T::c(1e-3) {
        let t2 = t * t;
        T::one() / T::c(12.0) + t2 / T::c(720.0) + t2 * t2 / T::c(30240.0)
    } else {
        T::one() / (t * t) - (T::one() + t.cos()) / (T::c(2.0) * t * t.sin())
    };
    DMatrix::identity(3, 3) + &k * T::c(0.5) + &k * &k * coeff
}

pub fn so3_group<T: Real>() -> LieGroupSpec<T> {
    let basis = (0..3)
        .map(|a| {
            hat(&DVector::from_fn(3, |i, _| {
                if i == a {
                    T::one()
                } else {
                    T::zero()
                }
            }))
        })
        .collect();
    let group = MatrixGroup::new(
        basis,
        Arc::new(|m: &DMatrix<T>| Ok(log_matrix(m))),
        Some(Arc::new(|m: &DMatrix<T>| exp_matrix(m))),
        Some(T::pi() - T::c(CHART_MARGIN)),
    )
    .expect("so(3) basis is valid");
    LieGroupSpec::matrix("SO3", group).expect("so(3) structure constants satisfy Jacobi")
}
