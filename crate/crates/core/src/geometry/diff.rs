//! Central-difference derivatives of plain coordinate maps.
//!
//! Every derivative of a user-supplied map goes through these helpers so the
//! step rule is uniform: `h = cbrt(eps) * max(1, |x_j|)`, with the effective
//! step recomputed from the perturbed coordinates to cancel representation
//! error.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Step used for coordinate `value`.
pub fn step_for<T: Real>(value: T) -> T {
    T::fd_base_step() * value.abs().max(T::one())
}

/// Central-difference Jacobian of `map` at `at`.
pub fn numeric_jacobian<T, F>(map: F, at: &DVector<T>) -> Result<DMatrix<T>>
where
    T: Real,
    F: Fn(&DVector<T>) -> DVector<T>,
{
    try_numeric_jacobian(|x| Ok(map(x)), at)
}

/// Fallible variant of [`numeric_jacobian`]; errors from `map` propagate.
pub fn try_numeric_jacobian<T, F>(map: F, at: &DVector<T>) -> Result<DMatrix<T>>
where
    T: Real,
    F: Fn(&DVector<T>) -> Result<DVector<T>>,
{
    let n = at.len();
    let mut columns: Vec<DVector<T>> = Vec::with_capacity(n);
    let mut rows = None;
    for j in 0..n {
        let h = step_for(at[j]);
        let mut plus = at.clone();
        let mut minus = at.clone();
        plus[j] += h;
        minus[j] -= h;
        let width = plus[j] - minus[j];
        let fp = map(&plus)?;
        let fm = map(&minus)?;
        if fp.len() != fm.len() {
            return Err(Error::DimensionMismatch {
                context: "numeric_jacobian output",
                expected: fp.len(),
                got: fm.len(),
            });
        }
        if !fp.iter().chain(fm.iter()).all(|v| v.is_finite()) {
            return Err(Error::DifferentiationFailure { coordinate: j });
        }
        rows.get_or_insert(fp.len());
        columns.push((fp - fm) / width);
    }
    let rows = match rows {
        Some(r) => r,
        None => map(at)?.len(),
    };
    let mut jac = DMatrix::zeros(rows, n);
    for (j, col) in columns.iter().enumerate() {
        jac.set_column(j, col);
    }
    Ok(jac)
}

/// Central-difference gradient of a scalar function.
pub fn numeric_gradient<T, F>(f: F, at: &DVector<T>) -> Result<DVector<T>>
where
    T: Real,
    F: Fn(&DVector<T>) -> Result<T>,
{
    let mut grad = DVector::zeros(at.len());
    for j in 0..at.len() {
        let h = step_for(at[j]);
        let mut plus = at.clone();
        let mut minus = at.clone();
        plus[j] += h;
        minus[j] -= h;
        let width = plus[j] - minus[j];
        let fp = f(&plus)?;
        let fm = f(&minus)?;
        if !(fp.is_finite() && fm.is_finite()) {
            return Err(Error::DifferentiationFailure { coordinate: j });
        }
        grad[j] = (fp - fm) / width;
    }
    Ok(grad)
}

/// Central-difference derivative of a curve `s -> R^n` at `s = 0`.
pub fn curve_velocity<T, F>(curve: F) -> Result<DVector<T>>
where
    T: Real,
    F: Fn(T) -> Result<DVector<T>>,
{
    let h = T::fd_base_step();
    let fp = curve(h)?;
    let fm = curve(-h)?;
    if !fp.iter().chain(fm.iter()).all(|v| v.is_finite()) {
        return Err(Error::DifferentiationFailure { coordinate: 0 });
    }
    Ok((fp - fm) / (h + h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn identity_map_gives_identity() {
        let at = dvector![0.3, -2.0, 11.0];
        let jac = numeric_jacobian(|x: &DVector<f64>| x.clone(), &at).unwrap();
        assert!((jac - DMatrix::identity(3, 3)).amax() < 1e-12);
    }

    #[test]
    fn hand_differentiated_polynomial() {
        // d(x1^2, x1 x2) = [[2 x1, 0], [x2, x1]]
        let at = dvector![1.0, 2.0];
        let jac =
            numeric_jacobian(|x: &DVector<f64>| dvector![x[0] * x[0], x[0] * x[1]], &at).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 2.0, 1.0]);
        assert!((jac - expected).amax() < 1e-8);
    }

    #[test]
    fn non_finite_output_is_reported() {
        let at = dvector![0.0, 1.0];
        let err = numeric_jacobian(
            |x: &DVector<f64>| dvector![1.0 / x[0].abs().min(x[1] - 1.0)],
            &at,
        )
        .unwrap_err();
        assert!(matches!(err, Error::DifferentiationFailure { .. }));
    }

    #[test]
    fn gradient_of_quadratic() {
        let at = dvector![0.5, -1.5];
        let g =
            numeric_gradient(|x: &DVector<f64>| Ok(x[0] * x[0] + 3.0 * x[0] * x[1]), &at).unwrap();
        assert!((g - dvector![1.0 - 4.5, 1.5]).amax() < 1e-9);
    }
}
