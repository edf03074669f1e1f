//! Affine control systems, costs, and checks of the symmetry hypotheses.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::geometry::subspace::{rank, subspace_distance};
use crate::geometry::{GroupAction, LieGroupSpec};
use crate::scalar::Real;

pub type FieldFn<T> = Arc<dyn Fn(&DVector<T>) -> DVector<T> + Send + Sync>;
pub type FrameFn<T> = Arc<dyn Fn(&DVector<T>) -> DMatrix<T> + Send + Sync>;
pub type CostFn<T> = Arc<dyn Fn(&DVector<T>, &DVector<T>) -> T + Send + Sync>;
pub type CostHessianFn<T> = Arc<dyn Fn(&DVector<T>, &DVector<T>) -> DMatrix<T> + Send + Sync>;
pub type RepresentationFn<T> = Arc<dyn Fn(&DVector<T>) -> DMatrix<T> + Send + Sync>;

/// `xdot = X_0(x) + sum_i u_i X_i(x)` on an `m`-dimensional chart.
#[derive(Clone)]
pub struct AffineControlSystem<T: Real> {
    m: usize,
    d: usize,
    drift: Option<FieldFn<T>>,
    fields: FrameFn<T>,
}

impl<T: Real> fmt::Debug for AffineControlSystem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AffineControlSystem")
            .field("m", &self.m)
            .field("d", &self.d)
            .field("has_drift", &self.drift.is_some())
            .finish()
    }
}

impl<T: Real> AffineControlSystem<T> {
    /// `fields(x)` returns the `m x d` matrix whose columns are `X_i(x)`.
    pub fn new(m: usize, d: usize, fields: FrameFn<T>) -> Self {
        Self {
            m,
            d,
            drift: None,
            fields,
        }
    }

    pub fn with_drift(mut self, drift: FieldFn<T>) -> Self {
        self.drift = Some(drift);
        self
    }

    pub fn state_dim(&self) -> usize {
        self.m
    }

    pub fn control_dim(&self) -> usize {
        self.d
    }

    pub fn is_drift_free(&self) -> bool {
        self.drift.is_none()
    }

    pub fn frame(&self, x: &DVector<T>) -> Result<DMatrix<T>> {
        check_dim("configuration", self.m, x.len())?;
        let frame = (self.fields)(x);
        if frame.nrows() != self.m || frame.ncols() != self.d {
            return Err(Error::DimensionMismatch {
                context: "control frame",
                expected: self.m * self.d,
                got: frame.nrows() * frame.ncols(),
            });
        }
        Ok(frame)
    }

    pub fn drift(&self, x: &DVector<T>) -> Result<DVector<T>> {
        check_dim("configuration", self.m, x.len())?;
        match &self.drift {
            Some(f) => {
                let v = f(x);
                check_dim("drift field", self.m, v.len())?;
                Ok(v)
            }
            None => Ok(DVector::zeros(self.m)),
        }
    }

    pub fn eval_dynamics(&self, x: &DVector<T>, u: &DVector<T>) -> Result<DVector<T>> {
        check_dim("control", self.d, u.len())?;
        Ok(self.drift(x)? + self.frame(x)? * u)
    }
}

/// Running cost `C(x, u)`.
#[derive(Clone)]
pub enum Cost<T: Real> {
    /// `C = 1/2 u^T g(x) u` with `g(x)` symmetric positive definite.
    Quadratic(FrameFn<T>),
    /// Arbitrary smooth cost, strictly convex in `u`; the Hessian in `u` is
    /// approximated by differences when not supplied.
    General {
        eval: CostFn<T>,
        hessian: Option<CostHessianFn<T>>,
    },
}

impl<T: Real> fmt::Debug for Cost<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cost::Quadratic(_) => f.write_str("Cost::Quadratic"),
            Cost::General { hessian, .. } => write!(
                f,
                "Cost::General {{ exact_hessian: {} }}",
                hessian.is_some()
            ),
        }
    }
}

impl<T: Real> Cost<T> {
    pub fn identity(d: usize) -> Self {
        Cost::Quadratic(Arc::new(move |_| DMatrix::identity(d, d)))
    }

    /// `1/2 sum_i w_i u_i^2`.
    pub fn diagonal(weights: Vec<T>) -> Self {
        let w = DMatrix::from_diagonal(&DVector::from_vec(weights));
        Cost::Quadratic(Arc::new(move |_| w.clone()))
    }

    pub fn is_quadratic(&self) -> bool {
        matches!(self, Cost::Quadratic(_))
    }

    pub fn eval(&self, x: &DVector<T>, u: &DVector<T>) -> T {
        match self {
            Cost::Quadratic(g) => u.dot(&(g(x) * u)) * T::c(0.5),
            Cost::General { eval, .. } => eval(x, u),
        }
    }

    /// Hessian of `C` in `u`.
    pub fn hessian(&self, x: &DVector<T>, u: &DVector<T>) -> Result<DMatrix<T>> {
        match self {
            Cost::Quadratic(g) => Ok(g(x)),
            Cost::General {
                hessian: Some(h), ..
            } => Ok(h(x, u)),
            Cost::General {
                eval,
                hessian: None,
            } => {
                let grad = |v: &DVector<T>| cost_gradient(eval, x, v);
                let h = crate::geometry::diff::try_numeric_jacobian(grad, u)?;
                Ok((&h + h.transpose()) * T::c(0.5))
            }
        }
    }

    /// Gradient of `C` in `u`.
    pub fn gradient(&self, x: &DVector<T>, u: &DVector<T>) -> Result<DVector<T>> {
        match self {
            Cost::Quadratic(g) => Ok(g(x) * u),
            Cost::General { eval, .. } => cost_gradient(eval, x, u),
        }
    }

    /// The metric `g_ij(x)` used by the drift-free Legendre map; for general
    /// costs, the Hessian at `u = 0`.
    pub fn metric(&self, x: &DVector<T>, d: usize) -> Result<DMatrix<T>> {
        let g = self.hessian(x, &DVector::zeros(d))?;
        check_dim("cost metric", d * d, g.nrows() * g.ncols())?;
        Ok(g)
    }
}

fn cost_gradient<T: Real>(eval: &CostFn<T>, x: &DVector<T>, u: &DVector<T>) -> Result<DVector<T>> {
    crate::geometry::numeric_gradient(|v| Ok(eval(x, v)), u)
}

/// Group, action, and optional linear representation `sigma_g` on controls.
#[derive(Clone)]
pub struct SymmetrySpec<T: Real> {
    pub group: LieGroupSpec<T>,
    pub action: GroupAction<T>,
    pub control_rep: Option<RepresentationFn<T>>,
}

impl<T: Real> fmt::Debug for SymmetrySpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymmetrySpec")
            .field("group", &self.group)
            .field("action", &self.action)
            .field("declared_control_rep", &self.control_rep.is_some())
            .finish()
    }
}

impl<T: Real> SymmetrySpec<T> {
    pub fn new(group: LieGroupSpec<T>, action: GroupAction<T>) -> Result<Self> {
        check_dim("group block", group.dim(), action.group_indices().len())?;
        Ok(Self {
            group,
            action,
            control_rep: None,
        })
    }

    pub fn with_control_representation(mut self, rep: RepresentationFn<T>) -> Self {
        self.control_rep = Some(rep);
        self
    }

    pub fn k(&self) -> usize {
        self.group.dim()
    }

    pub fn s(&self) -> usize {
        self.action.shape_dim()
    }
}

/// Least-squares `R(x, g)` with `T_x Phi_g X_i(x) = sum_j R_i^j X_j(gx)`,
/// stored as `R[(i, j)] = R_i^j`, and the largest column residual.
pub fn representation_lstsq<T: Real>(
    sys: &AffineControlSystem<T>,
    sym: &SymmetrySpec<T>,
    x: &DVector<T>,
    g: &DVector<T>,
) -> Result<(DMatrix<T>, T)> {
    let gx = sym.action.apply(g, x)?;
    let pushed = sym.action.pushforward(g, x)? * sys.frame(x)?;
    let target = sys.frame(&gx)?;
    let r = rank(&target);
    if r < sys.control_dim() {
        return Err(Error::DegenerateFrame {
            rank: r,
            expected: sys.control_dim(),
        });
    }
    let normal = (target.transpose() * &target)
        .cholesky()
        .ok_or(Error::DegenerateFrame {
            rank: r,
            expected: sys.control_dim(),
        })?;
    let m = normal.solve(&(target.transpose() * &pushed));
    let residual = (&target * &m - &pushed)
        .column_iter()
        .fold(T::zero(), |acc, c| acc.max(c.norm()));
    Ok((m.transpose(), residual))
}

/// `R(x, g)` from the pushed-forward control frame, with residual.
pub fn control_representation<T: Real>(
    sys: &AffineControlSystem<T>,
    sym: &SymmetrySpec<T>,
    x: &DVector<T>,
    g: &DVector<T>,
    tolerance: T,
) -> Result<(DMatrix<T>, T)> {
    if *g == sym.group.identity() {
        return Ok((
            DMatrix::identity(sys.control_dim(), sys.control_dim()),
            T::zero(),
        ));
    }
    let (r, residual) = representation_lstsq(sys, sym, x, g)?;
    if residual > tolerance {
        return Err(Error::NotInvariant {
            residual: residual.as_f64(),
        });
    }
    Ok((r, residual))
}

/// `sigma_g` acting on controls at `x`: the declared representation, or `R(x,g)^T`.
pub fn control_action<T: Real>(
    sys: &AffineControlSystem<T>,
    sym: &SymmetrySpec<T>,
    x: &DVector<T>,
    g: &DVector<T>,
) -> Result<DMatrix<T>> {
    match &sym.control_rep {
        Some(rep) => Ok(rep(g)),
        None => Ok(representation_lstsq(sys, sym, x, g)?.0.transpose()),
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SymmetryResiduals {
    pub dynamics: f64,
    pub drift: f64,
    pub distribution: f64,
    pub cost: f64,
}

impl SymmetryResiduals {
    pub fn max(&self) -> f64 {
        self.dynamics
            .max(self.drift)
            .max(self.distribution)
            .max(self.cost)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SymmetryReport {
    pub tolerance: f64,
    pub samples: Vec<SymmetryResiduals>,
    pub max: SymmetryResiduals,
    pub failing_samples: Vec<usize>,
    pub passed: bool,
}

/// Residuals of the equivariance hypotheses on `(x, u, g)` samples.
pub fn verify_symmetry<T: Real>(
    sys: &AffineControlSystem<T>,
    cost: &Cost<T>,
    sym: &SymmetrySpec<T>,
    samples: &[(DVector<T>, DVector<T>, DVector<T>)],
    tolerance: f64,
) -> Result<SymmetryReport> {
    let mut out = Vec::with_capacity(samples.len());
    for (x, u, g) in samples {
        out.push(sample_residuals(sys, cost, sym, x, u, g)?);
    }
    let fold = |f: fn(&SymmetryResiduals) -> f64| out.iter().map(f).fold(0.0, f64::max);
    let max = SymmetryResiduals {
        dynamics: fold(|r| r.dynamics),
        drift: fold(|r| r.drift),
        distribution: fold(|r| r.distribution),
        cost: fold(|r| r.cost),
    };
    let failing_samples: Vec<usize> = out
        .iter()
        .enumerate()
        .filter(|(_, r)| !(r.max() <= tolerance))
        .map(|(i, _)| i)
        .collect();
    Ok(SymmetryReport {
        tolerance,
        passed: failing_samples.is_empty(),
        samples: out,
        max,
        failing_samples,
    })
}

fn sample_residuals<T: Real>(
    sys: &AffineControlSystem<T>,
    cost: &Cost<T>,
    sym: &SymmetrySpec<T>,
    x: &DVector<T>,
    u: &DVector<T>,
    g: &DVector<T>,
) -> Result<SymmetryResiduals> {
    if *g == sym.group.identity() {
        return Ok(SymmetryResiduals {
            dynamics: 0.0,
            drift: 0.0,
            distribution: 0.0,
            cost: 0.0,
        });
    }
    let gx = sym.action.apply(g, x)?;
    let push = sym.action.pushforward(g, x)?;
    let su = match control_action(sys, sym, x, g) {
        Ok(sigma) => sigma * u,
        Err(Error::DegenerateFrame { .. }) => u.clone(),
        Err(e) => return Err(e),
    };
    let dynamics = (&push * sys.eval_dynamics(x, u)? - sys.eval_dynamics(&gx, &su)?).norm();
    let drift = (&push * sys.drift(x)? - sys.drift(&gx)?).norm();
    let distribution = subspace_distance(&(&push * sys.frame(x)?), &sys.frame(&gx)?);
    let cost = (cost.eval(&gx, &su) - cost.eval(x, u)).abs();
    Ok(SymmetryResiduals {
        dynamics: dynamics.as_f64(),
        drift: drift.as_f64(),
        distribution: distribution.as_f64(),
        cost: cost.as_f64(),
    })
}
