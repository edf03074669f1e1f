//! Control Hamiltonian, optimal control, momentum map, and the canonical flow on `T*M`.

use nalgebra::{DMatrix, DVector};

use crate::control::{AffineControlSystem, Cost, SymmetrySpec};
use crate::error::{check_dim, Error, Result};
use crate::geometry::numeric_gradient;
use crate::ode::rk4;
use crate::scalar::Real;

const CONTROL_NEWTON_MAX_ITER: usize = 50;

/// A phase point `(x, lambda)` in chart coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct CotangentState<T: Real> {
    pub x: DVector<T>,
    pub lambda: DVector<T>,
}

impl<T: Real> CotangentState<T> {
    pub fn new(x: DVector<T>, lambda: DVector<T>) -> Result<Self> {
        check_dim("costate", x.len(), lambda.len())?;
        Ok(Self { x, lambda })
    }

    fn packed(&self) -> DVector<T> {
        let m = self.x.len();
        DVector::from_fn(
            2 * m,
            |i, _| if i < m { self.x[i] } else { self.lambda[i - m] },
        )
    }

    fn unpack(y: &DVector<T>) -> Self {
        let m = y.len() / 2;
        Self {
            x: y.rows(0, m).into_owned(),
            lambda: y.rows(m, m).into_owned(),
        }
    }
}

/// Output of [`integrate_canonical`].
#[derive(Debug, Clone)]
pub struct Trajectory<T: Real> {
    pub times: Vec<T>,
    pub states: Vec<CotangentState<T>>,
    pub controls: Vec<DVector<T>>,
    pub hamiltonian: Vec<T>,
    /// Momentum map per node; empty when no symmetry was supplied.
    pub momentum: Vec<DVector<T>>,
}

/// `<lambda, f(x, u)> - C(x, u)`.
pub fn control_hamiltonian<T: Real>(
    sys: &AffineControlSystem<T>,
    cost: &Cost<T>,
    s: &CotangentState<T>,
    u: &DVector<T>,
) -> Result<T> {
    check_dim("costate", sys.state_dim(), s.lambda.len())?;
    Ok(s.lambda.dot(&sys.eval_dynamics(&s.x, u)?) - cost.eval(&s.x, u))
}

/// `u*` maximizing the control Hamiltonian.
///
/// Quadratic costs solve `g u = X^T lambda` directly. Other costs run a damped
/// Newton iteration on `X^T lambda - dC/du = 0` from `u = 0`.
pub fn optimal_control<T: Real>(
    sys: &AffineControlSystem<T>,
    cost: &Cost<T>,
    s: &CotangentState<T>,
) -> Result<DVector<T>> {
    check_dim("costate", sys.state_dim(), s.lambda.len())?;
    let frame = sys.frame(&s.x)?;
    let pairing = frame.transpose() * &s.lambda;
    match cost {
        Cost::Quadratic(metric) => {
            let g = metric(&s.x);
            check_dim(
                "cost metric",
                sys.control_dim() * sys.control_dim(),
                g.nrows() * g.ncols(),
            )?;
            let chol = g.cholesky().ok_or(Error::SingularMetric)?;
            Ok(chol.solve(&pairing))
        }
        Cost::General { .. } => newton_control(cost, &s.x, &pairing),
    }
}

fn newton_control<T: Real>(
    cost: &Cost<T>,
    x: &DVector<T>,
    pairing: &DVector<T>,
) -> Result<DVector<T>> {
    let d = pairing.len();
    let tol = T::c(1e-9) * pairing.norm().max(T::one());
    let stationarity =
        |u: &DVector<T>| -> Result<DVector<T>> { Ok(pairing - cost.gradient(x, u)?) };
    let mut u = DVector::zeros(d);
    let mut r = stationarity(&u)?;
    for _ in 0..CONTROL_NEWTON_MAX_ITER {
        if r.norm() <= tol {
            return Ok(u);
        }
        let hess = cost.hessian(x, &u)?;
        let step = hess.lu().solve(&r).ok_or(Error::SingularMetric)?;
        let mut alpha = T::one();
        loop {
            let trial = &u + &step * alpha;
            let rt = stationarity(&trial)?;
            if rt.norm() < r.norm() || alpha < T::c(1e-8) {
                u = trial;
                r = rt;
                break;
            }
            alpha *= T::c(0.5);
        }
    }
    if r.norm() <= tol {
        return Ok(u);
    }
    Err(Error::NoUniqueOptimalControl {
        iterations: CONTROL_NEWTON_MAX_ITER,
    })
}

/// `H(lambda_x) = Hhat(lambda_x, u*(lambda_x))`.
pub fn optimal_hamiltonian<T: Real>(
    sys: &AffineControlSystem<T>,
    cost: &Cost<T>,
    s: &CotangentState<T>,
) -> Result<T> {
    let u = optimal_control(sys, cost, s)?;
    control_hamiltonian(sys, cost, s, &u)
}

/// `(xdot, lambdadot)` of the canonical Hamiltonian vector field.
///
/// `xdot = dH/dlambda` is evaluated exactly as `f(x, u*)` (the envelope
/// identity, since `u*` is stationary); `lambdadot = -dH/dx` by central differences.
pub fn canonical_flow_field<T: Real>(
    sys: &AffineControlSystem<T>,
    cost: &Cost<T>,
    s: &CotangentState<T>,
) -> Result<(DVector<T>, DVector<T>)> {
    let u = optimal_control(sys, cost, s)?;
    let xdot = sys.eval_dynamics(&s.x, &u)?;
    let grad = numeric_gradient(
        |y| {
            optimal_hamiltonian(
                sys,
                cost,
                &CotangentState {
                    x: y.clone(),
                    lambda: s.lambda.clone(),
                },
            )
        },
        &s.x,
    )?;
    Ok((xdot, -grad))
}

/// `J_a = <lambda, (e_a)_M(x)>`.
pub fn momentum_map<T: Real>(sym: &SymmetrySpec<T>, s: &CotangentState<T>) -> Result<DVector<T>> {
    check_dim("costate", sym.action.dim(), s.lambda.len())?;
    Ok(sym.action.generator_matrix(&sym.group, &s.x)?.transpose() * &s.lambda)
}

/// Cotangent lift `T*Phi_{g^{-1}}`: `(x, lambda) -> (gx, DPhi_{g^{-1}}(gx)^T lambda)`.
pub fn cotangent_lift<T: Real>(
    sym: &SymmetrySpec<T>,
    g: &DVector<T>,
    s: &CotangentState<T>,
) -> Result<CotangentState<T>> {
    let gx = sym.action.apply(g, &s.x)?;
    let back = sym.action.pushforward(&sym.group.inverse(g)?, &gx)?;
    Ok(CotangentState {
        x: gx,
        lambda: back.transpose() * &s.lambda,
    })
}

/// RK4 on the canonical field with per-node `H` and (optionally) `J`.
pub fn integrate_canonical<T: Real>(
    sys: &AffineControlSystem<T>,
    cost: &Cost<T>,
    sym: Option<&SymmetrySpec<T>>,
    s0: &CotangentState<T>,
    t0: T,
    t1: T,
    h: T,
) -> Result<Trajectory<T>> {
    check_dim("initial state", sys.state_dim(), s0.x.len())?;
    check_dim("initial costate", sys.state_dim(), s0.lambda.len())?;
    let field = |_t: T, y: &DVector<T>| -> Result<DVector<T>> {
        let (xdot, ldot) = canonical_flow_field(sys, cost, &CotangentState::unpack(y))?;
        let m = xdot.len();
        Ok(DVector::from_fn(2 * m, |i, _| {
            if i < m {
                xdot[i]
            } else {
                ldot[i - m]
            }
        }))
    };
    let (times, ys) = rk4(field, &s0.packed(), t0, t1, h)?;
    let mut states = Vec::with_capacity(ys.len());
    let mut controls = Vec::with_capacity(ys.len());
    let mut hamiltonian = Vec::with_capacity(ys.len());
    let mut momentum = Vec::new();
    for y in &ys {
        let s = CotangentState::unpack(y);
        let u = optimal_control(sys, cost, &s)?;
        hamiltonian.push(control_hamiltonian(sys, cost, &s, &u)?);
        if let Some(sym) = sym {
            momentum.push(momentum_map(sym, &s)?);
        }
        controls.push(u);
        states.push(s);
    }
    Ok(Trajectory {
        times,
        states,
        controls,
        hamiltonian,
        momentum,
    })
}

/// `dH/du` at `(lambda_x, u)`; zero at `u*`.
pub fn control_stationarity<T: Real>(
    sys: &AffineControlSystem<T>,
    cost: &Cost<T>,
    s: &CotangentState<T>,
    u: &DVector<T>,
) -> Result<DVector<T>> {
    let frame: DMatrix<T> = sys.frame(&s.x)?;
    Ok(frame.transpose() * &s.lambda - cost.gradient(&s.x, u)?)
}
