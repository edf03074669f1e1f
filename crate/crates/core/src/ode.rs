//! Fixed-step classical Runge–Kutta, the single integrator for every flow.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Number of steps and the uniform step that exactly spans `[t0, t1]`.
pub fn step_grid<T: Real>(t0: T, t1: T, h: T) -> Result<(usize, T)> {
    if !(h > T::zero()) || !h.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "step must be positive and finite, got {h}"
        )));
    }
    if !(t1 > t0) || !(t1 - t0).is_finite() {
        return Err(Error::InvalidParameter(format!(
            "need t1 > t0, got [{t0}, {t1}]"
        )));
    }
    let ratio = ((t1 - t0) / h).as_f64();
    let n = (ratio - 1e-9).ceil().max(1.0) as usize;
    Ok((
        n,
        (t1 - t0) / T::from_usize(n).expect("step count fits the scalar type"),
    ))
}

/// Grid time `t0 + i h`, computed without accumulation.
pub fn grid_time<T: Real>(t0: T, h: T, i: usize) -> T {
    t0 + h * T::from_usize(i).expect("step index fits the scalar type")
}

/// One classical RK4 step.
pub fn rk4_step<T, F>(f: &mut F, t: T, y: &DVector<T>, h: T) -> Result<DVector<T>>
where
    T: Real,
    F: FnMut(T, &DVector<T>) -> Result<DVector<T>>,
{
    let half = h * T::c(0.5);
    let k1 = f(t, y)?;
    let k2 = f(t + half, &(y + &k1 * half))?;
    let k3 = f(t + half, &(y + &k2 * half))?;
    let k4 = f(t + h, &(y + &k3 * h))?;
    Ok(y + (k1 + (k2 + k3) * T::c(2.0) + k4) * (h / T::c(6.0)))
}

/// Integrates `y' = f(t, y)` over `[t0, t1]`; returns grid times and states.
///
/// A non-finite state stops the integration with [`Error::BlowUp`].
pub fn rk4<T, F>(mut f: F, y0: &DVector<T>, t0: T, t1: T, h: T) -> Result<(Vec<T>, Vec<DVector<T>>)>
where
    T: Real,
    F: FnMut(T, &DVector<T>) -> Result<DVector<T>>,
{
    let (n, step) = step_grid(t0, t1, h)?;
    if !y0.iter().all(|v| v.is_finite()) {
        return Err(Error::BlowUp {
            last_valid_time: t0.as_f64(),
        });
    }
    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    times.push(t0);
    states.push(y0.clone());
    for i in 0..n {
        let t = grid_time(t0, step, i);
        let next = match rk4_step(&mut f, t, &states[i], step) {
            Ok(y) => y,
            Err(Error::DifferentiationFailure { .. }) => {
                return Err(Error::BlowUp {
                    last_valid_time: t.as_f64(),
                })
            }
            Err(e) => return Err(e),
        };
        if !next.iter().all(|v| v.is_finite()) {
            return Err(Error::BlowUp {
                last_valid_time: t.as_f64(),
            });
        }
        times.push(if i + 1 == n {
            t1
        } else {
            grid_time(t0, step, i + 1)
        });
        states.push(next);
    }
    Ok((times, states))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn row_count_is_steps_plus_one() {
        let (t, y) = rk4(
            |_, y: &DVector<f64>| Ok(y.clone() * 0.0),
            &dvector![1.0],
            0.0,
            1.0,
            1e-3,
        )
        .unwrap();
        assert_eq!(t.len(), 1001);
        assert_eq!(y.len(), 1001);
        assert_eq!(*t.last().unwrap(), 1.0);
    }

    #[test]
    fn fourth_order_convergence() {
        let exact = (1.0f64).exp();
        let run = |h: f64| {
            rk4(
                |_, y: &DVector<f64>| Ok(y.clone()),
                &dvector![1.0],
                0.0,
                1.0,
                h,
            )
            .unwrap()
            .1
            .last()
            .unwrap()[0]
        };
        let e1 = (run(0.1) - exact).abs();
        let e2 = (run(0.05) - exact).abs();
        assert!((e1 / e2 - 16.0).abs() < 1.0, "ratio {}", e1 / e2);
    }

    #[test]
    fn blow_up_reports_last_time() {
        let err = rk4(
            |_, y: &DVector<f64>| Ok(y.map(|v| v * v * 1e300)),
            &dvector![1.0],
            0.0,
            1.0,
            0.1,
        )
        .unwrap_err();
        assert!(matches!(err, Error::BlowUp { last_valid_time } if last_valid_time < 1.0));
    }

    #[test]
    fn rejects_bad_interval() {
        assert!(rk4(
            |_, y: &DVector<f64>| Ok(y.clone()),
            &dvector![1.0],
            1.0,
            0.0,
            0.1
        )
        .is_err());
        assert!(rk4(
            |_, y: &DVector<f64>| Ok(y.clone()),
            &dvector![1.0],
            0.0,
            1.0,
            -0.1
        )
        .is_err());
    }
}
