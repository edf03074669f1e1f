//! Reduced Hamiltonian dynamics on `T*(M/G) ⊕ g̃*` and group reconstruction.
//!
//! A reduced point `(xbar, lambdabar, mutilde)` is represented by the unique
//! covector `lambda` at `(xbar, e)` with `<lambda, hl(d/dxbar^alpha)> = lambdabar_alpha`
//! and `J(lambda) = mutilde`. Every reduced quantity is evaluated through that
//! representative.

use nalgebra::{DMatrix, DVector};

use crate::connection::{ConnectionFrame, LocalConnectionData, ShapeStencil};
use crate::error::{check_dim, Error, Result};
use crate::geometry::subspace::hstack;
use crate::ode::{rk4, step_grid};
use crate::pmp::{control_hamiltonian, optimal_control, CotangentState};
use crate::problems::ProblemDefinition;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedState<T: Real> {
    pub xbar: DVector<T>,
    pub lambdabar: DVector<T>,
    pub mutilde: DVector<T>,
    /// Group element, used only by reconstruction.
    pub g: DVector<T>,
}

impl<T: Real> ReducedState<T> {
    /// State at the group identity.
    pub fn new(
        problem: &ProblemDefinition<T>,
        xbar: DVector<T>,
        lambdabar: DVector<T>,
        mutilde: DVector<T>,
    ) -> Result<Self> {
        check_dim("shape point", problem.s(), xbar.len())?;
        check_dim("shape costate", problem.s(), lambdabar.len())?;
        check_dim("body momentum", problem.k(), mutilde.len())?;
        Ok(Self {
            xbar,
            lambdabar,
            mutilde,
            g: problem.symmetry.group.identity(),
        })
    }

    pub fn with_group(mut self, g: DVector<T>) -> Self {
        self.g = g;
        self
    }

    fn packed(&self) -> DVector<T> {
        let s = self.xbar.len();
        let k = self.mutilde.len();
        DVector::from_fn(2 * s + k, |i, _| {
            if i < s {
                self.xbar[i]
            } else if i < 2 * s {
                self.lambdabar[i - s]
            } else {
                self.mutilde[i - 2 * s]
            }
        })
    }

    fn unpack(y: &DVector<T>, s: usize, g: &DVector<T>) -> Self {
        let k = y.len() - 2 * s;
        Self {
            xbar: y.rows(0, s).into_owned(),
            lambdabar: y.rows(s, s).into_owned(),
            mutilde: y.rows(2 * s, k).into_owned(),
            g: g.clone(),
        }
    }
}

/// Right-hand side of the reduced equations at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedField<T: Real> {
    pub xbar_dot: DVector<T>,
    pub lambdabar_dot: DVector<T>,
    pub mutilde_dot: DVector<T>,
    /// Locked body velocity `xitilde = dHbar/dmutilde`.
    pub xitilde: DVector<T>,
    /// Group body velocity `g^{-1} gdot = xitilde - A xbar_dot`.
    pub xi: DVector<T>,
    pub hamiltonian: T,
}

impl<T: Real> ReducedField<T> {
    fn packed(&self) -> DVector<T> {
        let s = self.xbar_dot.len();
        let k = self.mutilde_dot.len();
        DVector::from_fn(2 * s + k, |i, _| {
            if i < s {
                self.xbar_dot[i]
            } else if i < 2 * s {
                self.lambdabar_dot[i - s]
            } else {
                self.mutilde_dot[i - 2 * s]
            }
        })
    }
}

#[derive(Debug, Clone)]
pub struct ReducedTrajectory<T: Real> {
    pub times: Vec<T>,
    pub states: Vec<ReducedState<T>>,
    pub fields: Vec<ReducedField<T>>,
}

impl<T: Real> ReducedTrajectory<T> {
    pub fn hamiltonian(&self) -> Vec<T> {
        self.fields.iter().map(|f| f.hamiltonian).collect()
    }
}

/// Split of `Hbar = <lambdabar, fbar_shape> + <mutilde, fbar_algebra> - Cbar`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedHamiltonianParts<T: Real> {
    pub shape_velocity: DVector<T>,
    pub algebra_velocity: DVector<T>,
    pub cost: T,
    pub value: T,
}

/// `[L | V]` at a frame: horizontal lifts of shape directions, then generators.
fn adapted_basis<T: Real>(
    problem: &ProblemDefinition<T>,
    frame: &ConnectionFrame<T>,
) -> Result<DMatrix<T>> {
    Ok(hstack(
        &frame.shape_lifts(&problem.symmetry)?,
        &frame.generators,
    ))
}

fn stack<T: Real>(a: &DVector<T>, b: &DVector<T>) -> DVector<T> {
    DVector::from_fn(a.len() + b.len(), |i, _| {
        if i < a.len() {
            a[i]
        } else {
            b[i - a.len()]
        }
    })
}

/// The covector at `frame.x` pairing to `lambdabar` on lifts and to `momentum` on generators.
fn representative_at<T: Real>(
    problem: &ProblemDefinition<T>,
    frame: &ConnectionFrame<T>,
    lambdabar: &DVector<T>,
    momentum: &DVector<T>,
) -> Result<(CotangentState<T>, DMatrix<T>)> {
    let basis = adapted_basis(problem, frame)?;
    let lambda = basis
        .transpose()
        .lu()
        .solve(&stack(lambdabar, momentum))
        .ok_or(Error::SingularDecomposition)?;
    Ok((
        CotangentState {
            x: frame.x.clone(),
            lambda,
        },
        basis,
    ))
}

fn hamiltonian_at<T: Real>(
    problem: &ProblemDefinition<T>,
    frame: &ConnectionFrame<T>,
    lambdabar: &DVector<T>,
    mutilde: &DVector<T>,
) -> Result<T> {
    let (rep, _) = representative_at(problem, frame, lambdabar, mutilde)?;
    let u = optimal_control(&problem.system, &problem.cost, &rep)?;
    control_hamiltonian(&problem.system, &problem.cost, &rep, &u)
}

/// `(lambdabar, mutilde)` from a full phase point; `mutilde = Ad*_g J(lambda)`.
pub fn reduce_costate<T: Real>(
    problem: &ProblemDefinition<T>,
    s: &CotangentState<T>,
) -> Result<ReducedState<T>> {
    check_dim("costate", problem.m(), s.lambda.len())?;
    let frame = problem.frame_at(&s.x)?;
    let (xbar, g) = problem.symmetry.action.split(&s.x);
    let lambdabar = frame.shape_lifts(&problem.symmetry)?.transpose() * &s.lambda;
    let momentum = frame.generators.transpose() * &s.lambda;
    let mutilde = problem.symmetry.group.coadjoint(&g, &momentum)?;
    Ok(ReducedState {
        xbar,
        lambdabar,
        mutilde,
        g,
    })
}

/// Inverse of [`reduce_costate`] at the configuration `(xbar, g)`.
pub fn lift_costate<T: Real>(
    problem: &ProblemDefinition<T>,
    rs: &ReducedState<T>,
) -> Result<CotangentState<T>> {
    let group = &problem.symmetry.group;
    let x = problem.symmetry.action.assemble(&rs.xbar, &rs.g)?;
    let frame = problem.frame_at(&x)?;
    let momentum = group.coadjoint(&group.inverse(&rs.g)?, &rs.mutilde)?;
    Ok(representative_at(problem, &frame, &rs.lambdabar, &momentum)?.0)
}

/// Representative covector at `(xbar, e)`.
pub fn representative<T: Real>(
    problem: &ProblemDefinition<T>,
    rs: &ReducedState<T>,
) -> Result<CotangentState<T>> {
    let frame = crate::connection::frame_at_shape(problem, &rs.xbar)?;
    Ok(representative_at(problem, &frame, &rs.lambdabar, &rs.mutilde)?.0)
}

/// `Hbar(xbar, lambdabar, mutilde)`.
pub fn reduced_hamiltonian<T: Real>(
    problem: &ProblemDefinition<T>,
    rs: &ReducedState<T>,
) -> Result<T> {
    Ok(reduced_hamiltonian_parts(problem, rs)?.value)
}

pub fn reduced_hamiltonian_parts<T: Real>(
    problem: &ProblemDefinition<T>,
    rs: &ReducedState<T>,
) -> Result<ReducedHamiltonianParts<T>> {
    check_dim("shape costate", problem.s(), rs.lambdabar.len())?;
    check_dim("body momentum", problem.k(), rs.mutilde.len())?;
    let frame = crate::connection::frame_at_shape(problem, &rs.xbar)?;
    let (rep, basis) = representative_at(problem, &frame, &rs.lambdabar, &rs.mutilde)?;
    let u = optimal_control(&problem.system, &problem.cost, &rep)?;
    let xdot = problem.system.eval_dynamics(&rep.x, &u)?;
    let split = basis
        .lu()
        .solve(&xdot)
        .ok_or(Error::SingularDecomposition)?;
    let s = problem.s();
    let shape_velocity = split.rows(0, s).into_owned();
    let algebra_velocity = split.rows(s, problem.k()).into_owned();
    let cost = problem.cost.eval(&rep.x, &u);
    let value = control_hamiltonian(&problem.system, &problem.cost, &rep, &u)?;
    Ok(ReducedHamiltonianParts {
        shape_velocity,
        algebra_velocity,
        cost,
        value,
    })
}

/// Right-hand side of the reduced equations in coordinates:
///
/// ```text
/// xbar'      = dHbar/dlambdabar,   xitilde = dHbar/dmutilde
/// lambdabar'_a = -dHbar/dxbar^a - mu_c (B^c_{ba} xbar'^b + A^b_a C^c_{db} xitilde^d)
/// mutilde'_a = mu_b C^b_{da} (xitilde^d - A^d_c xbar'^c)
/// ```
///
/// The velocities are read off `f(x, u*)` at the representative, which equals
/// the fiber derivative of `Hbar` because `u*` is stationary.
pub fn hp_field<T: Real>(
    problem: &ProblemDefinition<T>,
    rs: &ReducedState<T>,
) -> Result<ReducedField<T>> {
    let (field, _) = hp_field_with_connection(problem, rs)?;
    Ok(field)
}

pub fn hp_field_with_connection<T: Real>(
    problem: &ProblemDefinition<T>,
    rs: &ReducedState<T>,
) -> Result<(ReducedField<T>, LocalConnectionData<T>)> {
    check_dim("shape costate", problem.s(), rs.lambdabar.len())?;
    check_dim("body momentum", problem.k(), rs.mutilde.len())?;
    let s = problem.s();
    let k = problem.k();
    let group = &problem.symmetry.group;
    let stencil = ShapeStencil::new(problem, &rs.xbar)?;
    let conn = stencil.connection_data(problem)?;

    let (rep, basis) = representative_at(problem, &stencil.center, &rs.lambdabar, &rs.mutilde)?;
    let u = optimal_control(&problem.system, &problem.cost, &rep)?;
    let hamiltonian = control_hamiltonian(&problem.system, &problem.cost, &rep, &u)?;
    let xdot = problem.system.eval_dynamics(&rep.x, &u)?;
    let split = basis
        .lu()
        .solve(&xdot)
        .ok_or(Error::SingularDecomposition)?;
    let xbar_dot = split.rows(0, s).into_owned();
    let xitilde = split.rows(s, k).into_owned();

    let mut grad = DVector::zeros(s);
    for alpha in 0..s {
        let hp = hamiltonian_at(problem, &stencil.plus[alpha], &rs.lambdabar, &rs.mutilde)?;
        let hm = hamiltonian_at(problem, &stencil.minus[alpha], &rs.lambdabar, &rs.mutilde)?;
        if !(hp.is_finite() && hm.is_finite()) {
            return Err(Error::DifferentiationFailure { coordinate: alpha });
        }
        grad[alpha] = (hp - hm) / stencil.widths[alpha];
    }

    let mu = &rs.mutilde;
    let commutative = group.is_commutative();
    let mut lambdabar_dot = -grad;
    for alpha in 0..s {
        let mut magnetic = T::zero();
        for a in 0..k {
            for beta in 0..s {
                magnetic += mu[a] * conn.b[a][(beta, alpha)] * xbar_dot[beta];
            }
        }
        if !commutative {
            for a in 0..k {
                for b in 0..k {
                    for d in 0..k {
                        magnetic += mu[a]
                            * conn.a[(b, alpha)]
                            * group.structure_constant(a, d, b)
                            * xitilde[d];
                    }
                }
            }
        }
        lambdabar_dot[alpha] -= magnetic;
    }

    let xi = &xitilde - &conn.a * &xbar_dot;
    let mutilde_dot = if commutative {
        DVector::zeros(k)
    } else {
        group.ad_star(&xi, mu)?
    };

    Ok((
        ReducedField {
            xbar_dot,
            lambdabar_dot,
            mutilde_dot,
            xitilde,
            xi,
            hamiltonian,
        },
        conn,
    ))
}

/// `(xi, mutilde')` for problems with `M = G`.
pub fn lie_poisson_field<T: Real>(
    problem: &ProblemDefinition<T>,
    mutilde: &DVector<T>,
) -> Result<(DVector<T>, DVector<T>)> {
    if problem.s() != 0 {
        return Err(Error::WrongProblemShape {
            expected: "M = G (no shape coordinates)",
        });
    }
    let empty = DVector::zeros(0);
    let rs = ReducedState::new(problem, empty.clone(), empty, mutilde.clone())?;
    let field = hp_field(problem, &rs)?;
    Ok((field.xitilde, field.mutilde_dot))
}

/// RK4 on the reduced equations; `rs0.g` is carried along unchanged.
pub fn integrate_reduced<T: Real>(
    problem: &ProblemDefinition<T>,
    rs0: &ReducedState<T>,
    t0: T,
    t1: T,
    h: T,
) -> Result<ReducedTrajectory<T>> {
    check_dim("initial shape point", problem.s(), rs0.xbar.len())?;
    check_dim("initial shape costate", problem.s(), rs0.lambdabar.len())?;
    check_dim("initial body momentum", problem.k(), rs0.mutilde.len())?;
    let s = problem.s();
    let field = |_t: T, y: &DVector<T>| -> Result<DVector<T>> {
        Ok(hp_field(problem, &ReducedState::unpack(y, s, &rs0.g))?.packed())
    };
    let (times, ys) = rk4(field, &rs0.packed(), t0, t1, h)?;
    let mut states = Vec::with_capacity(ys.len());
    let mut fields = Vec::with_capacity(ys.len());
    for y in &ys {
        let st = ReducedState::unpack(y, s, &rs0.g);
        fields.push(hp_field(problem, &st)?);
        states.push(st);
    }
    Ok(ReducedTrajectory {
        times,
        states,
        fields,
    })
}

/// Cubic Hermite interpolant of the reduced state at fraction `theta` of step `n`.
fn hermite<T: Real>(rt: &ReducedTrajectory<T>, n: usize, theta: T) -> DVector<T> {
    let h = rt.times[n + 1] - rt.times[n];
    let t2 = theta * theta;
    let t3 = t2 * theta;
    let two = T::c(2.0);
    let three = T::c(3.0);
    let h00 = two * t3 - three * t2 + T::one();
    let h10 = t3 - two * t2 + theta;
    let h01 = three * t2 - two * t3;
    let h11 = t3 - t2;
    rt.states[n].packed() * h00
        + rt.fields[n].packed() * (h10 * h)
        + rt.states[n + 1].packed() * h01
        + rt.fields[n + 1].packed() * (h11 * h)
}

fn body_velocity_at<T: Real>(
    problem: &ProblemDefinition<T>,
    rt: &ReducedTrajectory<T>,
    n: usize,
    theta: T,
) -> Result<DVector<T>> {
    let st = ReducedState::unpack(&hermite(rt, n, theta), problem.s(), &rt.states[n].g);
    Ok(hp_field(problem, &st)?.xi)
}

/// Group trajectory from `g^{-1} gdot = xitilde - A xbar_dot`, starting at `rt.states[0].g`.
///
/// Translation groups integrate by Simpson's rule; matrix groups use the
/// fourth-order Magnus step at the two Gauss points. Intermediate reduced
/// states come from cubic Hermite interpolation of the stored nodes.
pub fn reconstruct_group<T: Real>(
    problem: &ProblemDefinition<T>,
    rt: &ReducedTrajectory<T>,
) -> Result<Vec<DVector<T>>> {
    let group = &problem.symmetry.group;
    let mut g = rt.states[0].g.clone();
    let mut out = Vec::with_capacity(rt.times.len());
    out.push(g.clone());
    let sqrt3 = T::c(3.0).sqrt();
    for n in 0..rt.times.len().saturating_sub(1) {
        let h = rt.times[n + 1] - rt.times[n];
        if group.is_abelian_translation() {
            let mid = body_velocity_at(problem, rt, n, T::c(0.5))?;
            let incr =
                (&rt.fields[n].xi + mid * T::c(4.0) + &rt.fields[n + 1].xi) * (h / T::c(6.0));
            g += incr;
        } else {
            let c1 = T::c(0.5) - sqrt3 / T::c(6.0);
            let c2 = T::c(0.5) + sqrt3 / T::c(6.0);
            let a1 = body_velocity_at(problem, rt, n, c1)?;
            let a2 = body_velocity_at(problem, rt, n, c2)?;
            let omega = (&a1 + &a2) * (h * T::c(0.5))
                + group.bracket(&a1, &a2)? * (sqrt3 * h * h / T::c(12.0));
            g = group.multiply(&g, &group.exp_coords(&omega)?)?;
        }
        out.push(g.clone());
    }
    Ok(out)
}

/// Reduced flow followed by reconstruction; the returned states carry `g(t)`.
pub fn integrate_and_reconstruct<T: Real>(
    problem: &ProblemDefinition<T>,
    rs0: &ReducedState<T>,
    t0: T,
    t1: T,
    h: T,
) -> Result<ReducedTrajectory<T>> {
    step_grid(t0, t1, h)?;
    let mut rt = integrate_reduced(problem, rs0, t0, t1, h)?;
    let gs = reconstruct_group(problem, &rt)?;
    for (st, g) in rt.states.iter_mut().zip(gs) {
        st.g = g;
    }
    Ok(rt)
}

/// Configuration `(xbar, g)` assembled into chart coordinates.
pub fn configuration<T: Real>(
    problem: &ProblemDefinition<T>,
    rs: &ReducedState<T>,
) -> Result<DVector<T>> {
    problem.symmetry.action.assemble(&rs.xbar, &rs.g)
}
