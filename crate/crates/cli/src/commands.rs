use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use symred::bvp::{shoot_full, shoot_reduced, NewtonOptions, ShootingProblem, ShootingSummary};
use symred::connection::{check_connection_invariance, classify, curvature, KinematicClass};
use symred::io::{full_trajectory_csv, reduced_trajectory_csv, to_json, write_atomic};
use symred::pmp::integrate_canonical;
use symred::problems::BUILT_IN;
use symred::reduction::{integrate_and_reconstruct, reduce_costate};
use symred::suite::{compare_full_reduced, verify_problem};
use symred::{Error, Problem};

use crate::config::RunConfig;
use crate::CliError;

fn write(out: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = out.join(name);
    write_atomic(&path, contents)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn drift(values: &[f64]) -> f64 {
    values
        .iter()
        .map(|v| (v - values[0]).abs())
        .fold(0.0, f64::max)
}

#[derive(Serialize)]
struct Conservation {
    problem: String,
    rows: usize,
    t0: f64,
    t1: f64,
    h: f64,
    hamiltonian_drift: f64,
    momentum_map_drift: f64,
}

pub fn simulate(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let p = cfg.build_problem()?;
    let (t0, t1, h) = cfg.horizon()?;
    let s0 = cfg.initial_state(&p)?;
    let traj = integrate_canonical(&p.system, &p.cost, Some(&p.symmetry), &s0, t0, t1, h)?;
    let j0 = &traj.momentum[0];
    let report = Conservation {
        problem: p.name.clone(),
        rows: traj.times.len(),
        t0,
        t1,
        h,
        hamiltonian_drift: drift(&traj.hamiltonian),
        momentum_map_drift: traj
            .momentum
            .iter()
            .map(|j| (j - j0).amax())
            .fold(0.0, f64::max),
    };
    write(out, "trajectory.csv", &full_trajectory_csv(&traj))?;
    write(out, "conservation.json", &to_json(&report)?)
}

pub fn reduce_compare(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let p = cfg.build_problem()?;
    let (t0, t1, h) = cfg.horizon()?;
    let s0 = cfg.initial_state(&p)?;
    let cmp = compare_full_reduced(&p, &s0, t0, t1, h)?;
    write(out, "full.csv", &full_trajectory_csv(&cmp.full))?;
    write(
        out,
        "reduced.csv",
        &reduced_trajectory_csv(&cmp.reduced, true),
    )?;
    write(out, "comparison.json", &to_json(&cmp.report)?)
}

#[derive(Serialize)]
struct ShootEntry {
    x1: Vec<f64>,
    #[serde(flatten)]
    result: Option<ShootingSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    method: Option<String>,
}

#[derive(Serialize)]
struct ShootReport {
    problem: String,
    round_trip: bool,
    t0: f64,
    t1: f64,
    h: f64,
    results: Vec<ShootEntry>,
}

fn entry(
    method: &str,
    x1: &DVector<f64>,
    outcome: symred::Result<symred::ShootingResult>,
) -> Result<(ShootEntry, bool), CliError> {
    let x1 = x1.iter().copied().collect();
    match outcome {
        Ok(r) => Ok((
            ShootEntry {
                x1,
                result: Some(r.summary(method)),
                error: None,
                method: None,
            },
            true,
        )),
        Err(e @ (Error::MaxIterations { .. } | Error::SingularJacobian { .. })) => Ok((
            ShootEntry {
                x1,
                result: None,
                error: Some(e.to_string()),
                method: Some(method.into()),
            },
            false,
        )),
        Err(e) => Err(CliError::Numerical(e)),
    }
}

fn reduced_guess(p: &Problem, s0: &symred::Costate) -> symred::Result<DVector<f64>> {
    let rs = reduce_costate(p, s0)?;
    Ok(DVector::from_iterator(
        p.s() + p.k(),
        rs.lambdabar.iter().chain(rs.mutilde.iter()).copied(),
    ))
}

/// Shoots to `x1`, or, without `x1`, to the endpoint of a forward run from the
/// initial costate (a round trip).
pub fn shoot(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let p = cfg.build_problem()?;
    let (t0, t1, h) = cfg.horizon()?;
    let (full, reduced) = cfg.mode()?;
    let s0 = cfg.initial_state(&p)?;
    let target = cfg.x1(&p)?;
    let guess = match cfg.guess(&p)? {
        Some(g) => symred::Costate {
            x: s0.x.clone(),
            lambda: g,
        },
        None => s0.clone(),
    };
    let defaults = NewtonOptions::default();
    let options = NewtonOptions {
        tolerance: cfg.newton_tol.unwrap_or(defaults.tolerance),
        max_iterations: cfg.max_iter.unwrap_or(defaults.max_iterations),
        fd_step: cfg.fd_step.unwrap_or(defaults.fd_step),
        min_step: defaults.min_step,
    };
    let base = ShootingProblem {
        problem: &p,
        x0: s0.x.clone(),
        x1: s0.x.clone(),
        t0,
        t1,
        h,
        guess: guess.lambda.clone(),
        options,
    };

    let mut results = Vec::new();
    let mut converged = true;
    if full {
        let x1 = match &target {
            Some(x) => x.clone(),
            None => integrate_canonical(&p.system, &p.cost, None, &s0, t0, t1, h)?
                .states
                .last()
                .expect("non-empty")
                .x
                .clone(),
        };
        let sp = ShootingProblem {
            x1: x1.clone(),
            ..base.clone()
        };
        let (e, ok) = entry("full", &x1, shoot_full(&sp))?;
        converged &= ok;
        results.push(e);
    }
    if reduced {
        let x1 = match &target {
            Some(x) => x.clone(),
            None => {
                let rt = integrate_and_reconstruct(&p, &reduce_costate(&p, &s0)?, t0, t1, h)?;
                let last = rt.states.last().expect("non-empty");
                p.symmetry.action.assemble(&last.xbar, &last.g)?
            }
        };
        let sp = ShootingProblem {
            x1: x1.clone(),
            guess: reduced_guess(&p, &guess)?,
            ..base.clone()
        };
        let (e, ok) = entry("reduced", &x1, shoot_reduced(&sp))?;
        converged &= ok;
        results.push(e);
    }
    let report = ShootReport {
        problem: p.name.clone(),
        round_trip: target.is_none(),
        t0,
        t1,
        h,
        results,
    };
    write(out, "shoot.json", &to_json(&report)?)?;
    if converged {
        Ok(())
    } else {
        let failed: Vec<String> = report
            .results
            .iter()
            .filter_map(|r| r.error.clone())
            .collect();
        Err(CliError::NotConverged(failed.join("; ")))
    }
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

#[derive(Serialize)]
struct ConnectionSample {
    x: Vec<f64>,
    g: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    a: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    b: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    class: Option<KinematicClass>,
    #[serde(skip_serializing_if = "Option::is_none")]
    invariance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

/// Per-sample connection coefficients, curvature, classification, and invariance residual.
fn connection_report(p: &Problem, samples: usize) -> Vec<ConnectionSample> {
    p.samples(samples)
        .into_iter()
        .map(|(x, _, g)| {
            let mut entry = ConnectionSample {
                x: x.iter().copied().collect(),
                g: g.iter().copied().collect(),
                a: None,
                b: None,
                class: None,
                invariance: None,
                error: None,
            };
            let (xbar, _) = p.symmetry.action.split(&x);
            let filled = (|| -> symred::Result<()> {
                entry.class = Some(classify(&p.system, &p.symmetry, &x)?);
                let data = curvature(p, &xbar)?;
                entry.a = Some(rows(&data.a));
                entry.b = Some(data.b.iter().map(rows).collect());
                entry.invariance =
                    Some(check_connection_invariance(p, &[(x.clone(), g.clone())])?[0]);
                Ok(())
            })();
            if let Err(e) = filled {
                entry.error = Some(e.to_string());
            }
            entry
        })
        .collect()
}

pub fn verify(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let p = cfg.build_problem()?;
    let samples = cfg.samples.unwrap_or(100);
    let tolerance = cfg.tolerance.unwrap_or(1e-6);
    if samples == 0 {
        return Err(CliError::Config("samples: must be positive".into()));
    }
    let report = verify_problem(&p, samples, tolerance);
    println!("{:<44} {:>12} {:>10}  result", "check", "max", "tol");
    for c in &report.checks {
        println!(
            "{:<44} {:>12.3e} {:>10.1e}  {}",
            c.name,
            c.max_residual,
            c.tolerance,
            if c.passed { "pass" } else { "FAIL" }
        );
    }
    write(out, "verify.json", &to_json(&report)?)?;
    write(
        out,
        "connection.json",
        &to_json(&connection_report(&p, samples.min(10)))?,
    )?;
    if report.passed {
        Ok(())
    } else {
        let failed: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect();
        Err(CliError::VerifyFailed(format!(
            "{} ({})",
            p.name,
            failed.join(", ")
        )))
    }
}

pub fn list() {
    let about = [
        "snakeboard on SE(2) x S1 x S1; symmetry = R2xSO2 (default) or R2; parameter r",
        "rigid body on SO(3); parameters inertia, actuated (axes 1..=3)",
        "contact distribution on R3 with z-translation symmetry",
        "snakeboard with an action that is not a symmetry (negative control)",
    ];
    for (name, text) in BUILT_IN.iter().zip(about) {
        println!("{name:<20} {text}");
    }
}
