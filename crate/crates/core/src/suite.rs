//! Property checks and full-versus-reduced comparisons over a problem.

use nalgebra::DVector;
use serde::Serialize;

use crate::connection::{check_connection_invariance, classify, curvature, KinematicClass};
use crate::control::{control_representation, verify_symmetry};
use crate::error::Result;
use crate::geometry::subspace::projection_residual;
use crate::pmp::{integrate_canonical, CotangentState, Trajectory};
use crate::problems::ProblemDefinition;
use crate::reduction::{integrate_and_reconstruct, reduce_costate, ReducedTrajectory};
use crate::scalar::Real;

/// Closed-form curvature oracles are limited by the finite-difference step.
pub const CURVATURE_ORACLE_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckResult {
    fn measured(name: &str, max_residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            max_residual,
            tolerance,
            passed: max_residual <= tolerance,
            detail: None,
        }
    }

    fn failed(name: &str, tolerance: f64, detail: String) -> Self {
        Self {
            name: name.into(),
            max_residual: f64::INFINITY,
            tolerance,
            passed: false,
            detail: Some(detail),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub problem: String,
    pub samples: usize,
    pub tolerance: f64,
    pub checks: Vec<CheckResult>,
    pub classification: Option<KinematicClass>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn run_check(
    checks: &mut Vec<CheckResult>,
    name: &str,
    tolerance: f64,
    f: impl FnOnce() -> Result<f64>,
) {
    checks.push(match f() {
        Ok(r) => CheckResult::measured(name, r, tolerance),
        Err(e) => CheckResult::failed(name, tolerance, e.to_string()),
    });
}

fn max_of<T: Real>(values: impl IntoIterator<Item = T>) -> f64 {
    values.into_iter().fold(0.0, |acc, v| {
        let v = v.as_f64();
        if v.is_nan() || acc.is_nan() {
            f64::NAN
        } else {
            acc.max(v)
        }
    })
}

/// Symmetry hypotheses, action axioms, control-representation cocycle,
/// connection invariance, `H ⊆ D`, and closed-form curvature, on Halton samples.
pub fn verify_problem<T: Real>(
    problem: &ProblemDefinition<T>,
    samples: usize,
    tolerance: f64,
) -> VerifyReport {
    let pts = problem.samples(samples);
    let sym = &problem.symmetry;
    let group = &sym.group;
    let mut checks = Vec::new();

    match verify_symmetry(&problem.system, &problem.cost, sym, &pts, tolerance) {
        Ok(rep) => {
            checks.push(CheckResult::measured(
                "symmetry.dynamics",
                rep.max.dynamics,
                tolerance,
            ));
            checks.push(CheckResult::measured(
                "symmetry.drift",
                rep.max.drift,
                tolerance,
            ));
            checks.push(CheckResult::measured(
                "symmetry.distribution",
                rep.max.distribution,
                tolerance,
            ));
            checks.push(CheckResult::measured(
                "symmetry.cost",
                rep.max.cost,
                tolerance,
            ));
        }
        Err(e) => checks.push(CheckResult::failed("symmetry", tolerance, e.to_string())),
    }

    // Pair each sample with the next sample's group element.
    let pairs: Vec<_> = (0..pts.len())
        .map(|i| (&pts[i].0, &pts[i].2, &pts[(i + 1) % pts.len()].2))
        .collect();

    run_check(&mut checks, "action.axioms", 1e-10, || {
        let mut worst = T::zero();
        for (x, g, h) in &pairs {
            let (id, comp) = sym.action.axiom_residuals(group, g, h, x)?;
            worst = worst.max(id).max(comp);
        }
        Ok(worst.as_f64())
    });

    run_check(
        &mut checks,
        "control_representation.cocycle",
        tolerance,
        || {
            let mut worst = T::zero();
            let tol = T::c(tolerance);
            for (x, g, h) in &pairs {
                let gh = group.multiply(g, h)?;
                let hx = sym.action.apply(h, x)?;
                let (r_gh, _) = control_representation(&problem.system, sym, x, &gh, tol)?;
                let (r_g, _) = control_representation(&problem.system, sym, &hx, g, tol)?;
                let (r_h, _) = control_representation(&problem.system, sym, x, h, tol)?;
                worst = worst.max((r_gh - r_h * r_g).amax());
            }
            Ok(worst.as_f64())
        },
    );

    run_check(&mut checks, "connection.invariance", tolerance, || {
        let xg: Vec<(DVector<T>, DVector<T>)> =
            pts.iter().map(|(x, _, g)| (x.clone(), g.clone())).collect();
        Ok(max_of(check_connection_invariance(problem, &xg)?))
    });

    run_check(
        &mut checks,
        "connection.horizontal_in_distribution",
        1e-8,
        || {
            let mut worst = T::zero();
            for (x, _, _) in &pts {
                let frame = problem.frame_at(x)?;
                worst = worst.max(projection_residual(
                    &problem.system.frame(x)?,
                    &frame.horizontal,
                ));
            }
            Ok(worst.as_f64())
        },
    );

    if let Some(oracle) = &problem.oracle {
        run_check(
            &mut checks,
            "connection.curvature_oracle",
            CURVATURE_ORACLE_TOL,
            || {
                let mut worst = T::zero();
                for (x, _, _) in &pts {
                    let (xbar, _) = sym.action.split(x);
                    let data = curvature(problem, &xbar)?;
                    let (a, b) = oracle(&xbar);
                    worst = worst.max((&data.a - a).amax());
                    for (got, want) in data.b.iter().zip(b.iter()) {
                        worst = worst.max((got - want).amax());
                    }
                }
                Ok(worst.as_f64())
            },
        );
    }

    let classification = pts
        .first()
        .and_then(|(x, _, _)| classify(&problem.system, sym, x).ok());
    let passed = checks.iter().all(|c| c.passed);
    VerifyReport {
        problem: problem.name.clone(),
        samples,
        tolerance,
        checks,
        classification,
        passed,
    }
}

/// Full and reduced runs from matched data, with agreement metrics.
#[derive(Debug, Clone)]
pub struct Comparison<T: Real> {
    pub full: Trajectory<T>,
    pub reduced: ReducedTrajectory<T>,
    pub report: ComparisonReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub problem: String,
    pub full_dim: usize,
    pub reduced_dim: usize,
    /// Max over nodes of the configuration difference (inf-norm).
    pub max_configuration_deviation: f64,
    /// Max over nodes of `|H(t) - Hbar(t)|`.
    pub max_hamiltonian_mismatch: f64,
    /// Max over nodes of the difference between the reduced `mutilde` and the reduced full costate.
    pub max_momentum_deviation: f64,
    pub hamiltonian_drift: f64,
    pub reduced_hamiltonian_drift: f64,
    pub momentum_map_drift: f64,
    pub mutilde_drift: f64,
    /// Drift of `|mutilde|^2`.
    pub casimir_drift: f64,
}

fn drift<T: Real>(values: &[T]) -> f64 {
    values
        .iter()
        .map(|v| (*v - values[0]).abs().as_f64())
        .fold(0.0, f64::max)
}

fn vector_drift<T: Real>(values: &[DVector<T>]) -> f64 {
    values
        .iter()
        .map(|v| (v - &values[0]).amax().as_f64())
        .fold(0.0, f64::max)
}

/// Integrates the canonical flow from `s0` and the reduced flow from
/// `reduce_costate(s0)`, reconstructs, and compares.
pub fn compare_full_reduced<T: Real>(
    problem: &ProblemDefinition<T>,
    s0: &CotangentState<T>,
    t0: T,
    t1: T,
    h: T,
) -> Result<Comparison<T>> {
    let full = integrate_canonical(
        &problem.system,
        &problem.cost,
        Some(&problem.symmetry),
        s0,
        t0,
        t1,
        h,
    )?;
    let rs0 = reduce_costate(problem, s0)?;
    let reduced = integrate_and_reconstruct(problem, &rs0, t0, t1, h)?;
    let mut config = 0.0f64;
    let mut ham = 0.0f64;
    let mut momentum = 0.0f64;
    for (i, st) in reduced.states.iter().enumerate() {
        let x = problem.symmetry.action.assemble(&st.xbar, &st.g)?;
        config = config.max((&x - &full.states[i].x).amax().as_f64());
        ham = ham.max(
            (full.hamiltonian[i] - reduced.fields[i].hamiltonian)
                .abs()
                .as_f64(),
        );
        let from_full = reduce_costate(problem, &full.states[i])?;
        momentum = momentum.max((&from_full.mutilde - &st.mutilde).amax().as_f64());
    }
    let mus: Vec<DVector<T>> = reduced.states.iter().map(|s| s.mutilde.clone()).collect();
    let casimir: Vec<T> = mus.iter().map(|m| m.norm_squared()).collect();
    let report = ComparisonReport {
        problem: problem.name.clone(),
        full_dim: 2 * problem.m(),
        reduced_dim: 2 * problem.s() + problem.k(),
        max_configuration_deviation: config,
        max_hamiltonian_mismatch: ham,
        max_momentum_deviation: momentum,
        hamiltonian_drift: drift(&full.hamiltonian),
        reduced_hamiltonian_drift: drift(&reduced.hamiltonian()),
        momentum_map_drift: vector_drift(&full.momentum),
        mutilde_drift: vector_drift(&mus),
        casimir_drift: drift(&casimir),
    };
    Ok(Comparison {
        full,
        reduced,
        report,
    })
}
