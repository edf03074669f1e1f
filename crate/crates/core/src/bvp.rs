//! Fixed-endpoint optimal control by single shooting, in full and reduced coordinates.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::pmp::{integrate_canonical, CotangentState};
use crate::problems::ProblemDefinition;
use crate::reduction::{
    hp_field_with_connection, integrate_and_reconstruct, reduced_hamiltonian_parts, ReducedState,
    ReducedTrajectory,
};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions<T: Real> {
    pub tolerance: T,
    pub max_iterations: usize,
    /// Forward-difference step for Jacobian columns, scaled by `max(1, |z_j|)`.
    pub fd_step: T,
    /// Smallest damping factor tried by the backtracking line search.
    pub min_step: T,
}

impl<T: Real> Default for NewtonOptions<T> {
    fn default() -> Self {
        Self {
            tolerance: T::c(1e-10),
            max_iterations: 100,
            fd_step: T::c(1e-6),
            min_step: T::c(1e-8),
        }
    }
}

/// Endpoints, horizon, and initial guess for one boundary value problem.
#[derive(Debug, Clone)]
pub struct ShootingProblem<'a, T: Real> {
    pub problem: &'a ProblemDefinition<T>,
    pub x0: DVector<T>,
    pub x1: DVector<T>,
    pub t0: T,
    pub t1: T,
    pub h: T,
    /// `lambda_0` (length `m`) for full shooting, `(lambdabar_0, mutilde_0)`
    /// (length `s + k`) for reduced shooting.
    pub guess: DVector<T>,
    pub options: NewtonOptions<T>,
}

#[derive(Debug, Clone)]
pub struct ShootingResult<T: Real> {
    pub converged: bool,
    pub iterations: usize,
    /// Converged initial costate, in the same layout as the guess.
    pub unknowns: DVector<T>,
    pub residual: T,
    pub residual_history: Vec<T>,
    pub cost: T,
    /// Dimension of the ODE integrated per residual evaluation.
    pub integrated_dim: usize,
    /// `(algebra index, value)` of body momenta fixed in closed form.
    pub eliminated: Vec<(usize, T)>,
    pub times: Vec<T>,
    pub configurations: Vec<DVector<T>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EliminatedMomentum {
    pub index: usize,
    pub value: f64,
}

/// Serializable view of a [`ShootingResult`].
#[derive(Debug, Clone, Serialize)]
pub struct ShootingSummary {
    pub method: String,
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
    pub residual_history: Vec<f64>,
    pub unknowns: Vec<f64>,
    pub cost: f64,
    pub integrated_dim: usize,
    pub eliminated: Vec<EliminatedMomentum>,
}

impl<T: Real> ShootingResult<T> {
    pub fn summary(&self, method: &str) -> ShootingSummary {
        ShootingSummary {
            method: method.to_string(),
            converged: self.converged,
            iterations: self.iterations,
            residual: self.residual.as_f64(),
            residual_history: self.residual_history.iter().map(|r| r.as_f64()).collect(),
            unknowns: self.unknowns.iter().map(|v| v.as_f64()).collect(),
            cost: self.cost.as_f64(),
            integrated_dim: self.integrated_dim,
            eliminated: self
                .eliminated
                .iter()
                .map(|(i, v)| EliminatedMomentum {
                    index: *i,
                    value: v.as_f64(),
                })
                .collect(),
        }
    }
}

struct NewtonOutcome<T: Real> {
    z: DVector<T>,
    residual: T,
    history: Vec<T>,
    iterations: usize,
}

fn to_f64(v: &DVector<impl Real>) -> Vec<f64> {
    v.iter().map(|x| x.as_f64()).collect()
}

/// Damped Newton with forward-difference Jacobian and halving line search.
fn newton<T, F>(
    residual: F,
    guess: &DVector<T>,
    opts: &NewtonOptions<T>,
) -> Result<NewtonOutcome<T>>
where
    T: Real,
    F: Fn(&DVector<T>) -> Result<DVector<T>> + Sync,
{
    let mut z = guess.clone();
    let mut r = residual(&z)?;
    check_dim("newton residual", z.len(), r.len())?;
    let mut norm = r.norm();
    let mut history = vec![norm];
    let n = z.len();
    for iteration in 1..=opts.max_iterations {
        if norm <= opts.tolerance {
            return Ok(NewtonOutcome {
                z,
                residual: norm,
                history,
                iterations: iteration,
            });
        }
        let columns: Vec<Result<DVector<T>>> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..n)
                .map(|j| {
                    let (z, r, residual) = (&z, &r, &residual);
                    scope.spawn(move || {
                        let mut zp = z.clone();
                        zp[j] += opts.fd_step * z[j].abs().max(T::one());
                        let step = zp[j] - z[j];
                        residual(&zp).map(|rp| (rp - r) / step)
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("jacobian worker panicked"))
                .collect()
        });
        let mut jac = DMatrix::zeros(r.len(), n);
        for (j, col) in columns.into_iter().enumerate() {
            let col = col.map_err(|_| Error::SingularJacobian {
                iteration,
                residual: norm.as_f64(),
                last_iterate: to_f64(&z),
            })?;
            jac.set_column(j, &col);
        }
        let delta = jac.lu().solve(&(-&r));
        let delta = match delta {
            Some(d) if d.iter().all(|v| v.is_finite()) => d,
            _ => {
                return Err(Error::SingularJacobian {
                    iteration,
                    residual: norm.as_f64(),
                    last_iterate: to_f64(&z),
                })
            }
        };
        let mut alpha = T::one();
        loop {
            let trial = &z + &delta * alpha;
            if let Ok(rt) = residual(&trial) {
                let nt = rt.norm();
                if nt.is_finite() && (nt < norm || alpha <= opts.min_step) {
                    z = trial;
                    r = rt;
                    norm = nt;
                    break;
                }
            }
            if alpha <= opts.min_step {
                // No admissible step at all; stay put and let the iteration cap report it.
                break;
            }
            alpha = (alpha * T::c(0.5)).max(opts.min_step);
        }
        history.push(norm);
    }
    if norm <= opts.tolerance {
        return Ok(NewtonOutcome {
            z,
            residual: norm,
            history,
            iterations: opts.max_iterations,
        });
    }
    Err(Error::MaxIterations {
        iterations: opts.max_iterations,
        residual: norm.as_f64(),
        last_iterate: to_f64(&z),
    })
}

/// Composite Simpson rule on a uniform grid (3/8 rule for an odd tail).
pub fn simpson<T: Real>(values: &[T], h: T) -> T {
    let n = values.len().saturating_sub(1);
    match n {
        0 => T::zero(),
        1 => (values[0] + values[1]) * h * T::c(0.5),
        _ => {
            let even = if n.is_multiple_of(2) { n } else { n - 3 };
            let mut sum = T::zero();
            let mut i = 0;
            while i < even {
                sum += (values[i] + values[i + 1] * T::c(4.0) + values[i + 2]) * h / T::c(3.0);
                i += 2;
            }
            if even < n {
                let v = &values[even..];
                sum += (v[0] + (v[1] + v[2]) * T::c(3.0) + v[3]) * h * T::c(3.0) / T::c(8.0);
            }
            sum
        }
    }
}

fn uniform_step<T: Real>(times: &[T]) -> T {
    if times.len() < 2 {
        T::zero()
    } else {
        (times[times.len() - 1] - times[0])
            / T::from_usize(times.len() - 1).expect("step count fits")
    }
}

fn validate<T: Real>(sp: &ShootingProblem<'_, T>) -> Result<()> {
    check_dim("x0", sp.problem.m(), sp.x0.len())?;
    check_dim("x1", sp.problem.m(), sp.x1.len())?;
    if !(sp.t1 > sp.t0) {
        return Err(Error::InvalidParameter(
            "shooting horizon needs t1 > t0".into(),
        ));
    }
    Ok(())
}

/// Newton on `lambda_0` so that the canonical flow from `(x0, lambda_0)` reaches `x1`.
pub fn shoot_full<T: Real>(sp: &ShootingProblem<'_, T>) -> Result<ShootingResult<T>> {
    validate(sp)?;
    let p = sp.problem;
    check_dim("full shooting guess", p.m(), sp.guess.len())?;
    let residual = |lambda0: &DVector<T>| -> Result<DVector<T>> {
        let s0 = CotangentState {
            x: sp.x0.clone(),
            lambda: lambda0.clone(),
        };
        let traj = integrate_canonical(&p.system, &p.cost, None, &s0, sp.t0, sp.t1, sp.h)?;
        Ok(&traj.states.last().expect("trajectory is non-empty").x - &sp.x1)
    };
    let out = newton(residual, &sp.guess, &sp.options)?;
    let s0 = CotangentState {
        x: sp.x0.clone(),
        lambda: out.z.clone(),
    };
    let traj = integrate_canonical(&p.system, &p.cost, None, &s0, sp.t0, sp.t1, sp.h)?;
    let running: Vec<T> = traj
        .states
        .iter()
        .zip(&traj.controls)
        .map(|(s, u)| p.cost.eval(&s.x, u))
        .collect();
    Ok(ShootingResult {
        converged: true,
        iterations: out.iterations,
        unknowns: out.z,
        residual: out.residual,
        residual_history: out.history,
        cost: simpson(&running, uniform_step(&traj.times)),
        integrated_dim: 2 * p.m(),
        eliminated: Vec::new(),
        configurations: traj.states.into_iter().map(|s| s.x).collect(),
        times: traj.times,
    })
}

/// Body momenta that may be fixed in closed form, checked at the initial guess.
fn eliminable<T: Real>(p: &ProblemDefinition<T>, rs: &ReducedState<T>) -> Result<Vec<(usize, T)>> {
    if !p.symmetry.group.is_abelian_translation() || p.decoupled.is_empty() {
        return Ok(Vec::new());
    }
    let (field, conn) = hp_field_with_connection(p, rs)?;
    let mut out = Vec::new();
    for dm in &p.decoupled {
        let a = dm.index;
        if a >= p.k() || dm.coefficient == T::zero() {
            continue;
        }
        let scale = rs.mutilde.amax().max(T::one());
        let linear =
            (field.xitilde[a] - dm.coefficient * rs.mutilde[a]).abs() <= T::c(1e-8) * scale;
        let flat = conn.a.row(a).iter().all(|v| v.abs() <= T::c(1e-10));
        if linear && flat {
            out.push((a, dm.coefficient));
        }
    }
    Ok(out)
}

/// Newton on `(lambdabar_0, mutilde_0)` using the reduced flow and reconstruction.
///
/// Declared decoupled momenta of translation groups are fixed in closed form,
/// `mutilde_a = (g1_a - g0_a) / (c (t1 - t0))`, and drop out of the iteration.
pub fn shoot_reduced<T: Real>(sp: &ShootingProblem<'_, T>) -> Result<ShootingResult<T>> {
    validate(sp)?;
    let p = sp.problem;
    let (s, k) = (p.s(), p.k());
    check_dim("reduced shooting guess", s + k, sp.guess.len())?;
    let action = &p.symmetry.action;
    let group = &p.symmetry.group;
    let (xbar0, g0) = action.split(&sp.x0);
    let (xbar1, g1) = action.split(&sp.x1);

    let initial = |z: &DVector<T>| -> ReducedState<T> {
        ReducedState {
            xbar: xbar0.clone(),
            lambdabar: z.rows(0, s).into_owned(),
            mutilde: z.rows(s, k).into_owned(),
            g: g0.clone(),
        }
    };

    let coefficients = eliminable(p, &initial(&sp.guess))?;
    let eliminated: Vec<(usize, T)> = coefficients
        .iter()
        .map(|&(a, c)| (a, (g1[a] - g0[a]) / (c * (sp.t1 - sp.t0))))
        .collect();
    // Unknown slots still solved for; the same slots index the residual.
    let free: Vec<usize> = (0..s + k)
        .filter(|&i| i < s || !eliminated.iter().any(|(a, _)| s + a == i))
        .collect();

    let expand = |z: &DVector<T>| -> DVector<T> {
        let mut full = DVector::zeros(s + k);
        for (j, &i) in free.iter().enumerate() {
            full[i] = z[j];
        }
        for &(a, v) in &eliminated {
            full[s + a] = v;
        }
        full
    };
    let forward = |full: &DVector<T>| -> Result<ReducedTrajectory<T>> {
        integrate_and_reconstruct(p, &initial(full), sp.t0, sp.t1, sp.h)
    };
    let residual = |z: &DVector<T>| -> Result<DVector<T>> {
        let rt = forward(&expand(z))?;
        let last = rt.states.last().expect("trajectory is non-empty");
        let dg = group.difference(&last.g, &g1)?;
        let full = DVector::from_fn(s + k, |i, _| {
            if i < s {
                last.xbar[i] - xbar1[i]
            } else {
                dg[i - s]
            }
        });
        Ok(DVector::from_fn(free.len(), |j, _| full[free[j]]))
    };
    let z0 = DVector::from_fn(free.len(), |j, _| sp.guess[free[j]]);
    let out = newton(residual, &z0, &sp.options)?;
    let unknowns = expand(&out.z);
    let rt = forward(&unknowns)?;
    let mut running = Vec::with_capacity(rt.states.len());
    for st in &rt.states {
        running.push(reduced_hamiltonian_parts(p, st)?.cost);
    }
    let configurations = rt
        .states
        .iter()
        .map(|st| action.assemble(&st.xbar, &st.g))
        .collect::<Result<Vec<_>>>()?;
    Ok(ShootingResult {
        converged: true,
        iterations: out.iterations,
        unknowns,
        residual: out.residual,
        residual_history: out.history,
        cost: simpson(&running, uniform_step(&rt.times)),
        integrated_dim: 2 * s + k,
        eliminated,
        times: rt.times,
        configurations,
    })
}
