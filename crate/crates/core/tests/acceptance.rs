//! One line per acceptance criterion. Exits non-zero if any criterion fails.

use std::f64::consts::TAU;
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::{dvector, DMatrix, DVector};
use symred::bvp::{shoot_full, shoot_reduced, NewtonOptions, ShootingProblem};
use symred::connection::{
    check_connection_invariance, curvature, horizontal_space, local_coefficients,
};
use symred::geometry::subspace_distance;
use symred::pmp::{integrate_canonical, CotangentState};
use symred::problems::{
    build_heisenberg, build_rigid_body, build_snakeboard, build_snakeboard_broken,
    SnakeboardSymmetry,
};
use symred::reduction::{integrate_reduced, lie_poisson_field, reduce_costate, ReducedState};
use symred::suite::{compare_full_reduced, verify_problem};
use symred::{Error, Problem};

const LAMBDA0: [f64; 5] = [0.2, -0.1, 1.0, 0.5, 0.4];

struct Outcome {
    pass: bool,
    detail: String,
}

fn measure(pass: &mut bool, detail: &mut Vec<String>, label: &str, value: f64, tol: f64) {
    let ok = value <= tol;
    *pass &= ok;
    detail.push(format!(
        "{label}={value:.3e}{}{tol:.0e}",
        if ok { "<=" } else { ">" }
    ));
}

fn snakeboard(r: f64) -> Problem {
    build_snakeboard(r, SnakeboardSymmetry::R2xSO2).unwrap()
}

fn label(p: &Problem) -> String {
    format!("{}[s={},k={},d={}]", p.name, p.s(), p.k(), p.d())
}

fn built_ins() -> Vec<Problem> {
    vec![
        snakeboard(1.0),
        build_snakeboard(1.0, SnakeboardSymmetry::R2).unwrap(),
        build_rigid_body([1.0, 2.0, 3.0], &[0, 1, 2]).unwrap(),
        build_rigid_body([1.0, 2.0, 3.0], &[0, 1]).unwrap(),
        build_heisenberg().unwrap(),
    ]
}

fn c1_c2() -> symred::Result<(Outcome, Outcome)> {
    let p = snakeboard(1.0);
    let s0 = CotangentState::new(
        dvector![0.0, 0.0, 0.3, 0.0, 0.8],
        DVector::from_row_slice(&LAMBDA0),
    )?;
    let start = Instant::now();
    let cmp = compare_full_reduced(&p, &s0, 0.0, 1.0, 1e-3)?;
    let elapsed = start.elapsed().as_secs_f64();

    let (mut pass, mut detail) = (true, Vec::new());
    measure(
        &mut pass,
        &mut detail,
        "max_config_dev",
        cmp.report.max_configuration_deviation,
        1e-6,
    );
    measure(&mut pass, &mut detail, "runtime_s", elapsed, 5.0);
    pass &= cmp.report.full_dim == 10 && cmp.report.reduced_dim == 7;
    detail.push(format!(
        "dims={}/{}",
        cmp.report.full_dim, cmp.report.reduced_dim
    ));
    let c1 = Outcome {
        pass,
        detail: detail.join(" "),
    };

    let (mut pass, mut detail) = (true, Vec::new());
    // Noether: the momentum map is (lambda_1, lambda_2, lambda_psi).
    let j: Vec<DVector<f64>> = cmp
        .full
        .states
        .iter()
        .map(|s| dvector![s.lambda[0], s.lambda[1], s.lambda[3]])
        .collect();
    let j_drift = j.iter().map(|v| (v - &j[0]).amax()).fold(0.0, f64::max);
    measure(&mut pass, &mut detail, "J_drift", j_drift, 1e-9);
    measure(
        &mut pass,
        &mut detail,
        "H_drift",
        cmp.report.hamiltonian_drift,
        1e-9,
    );
    measure(
        &mut pass,
        &mut detail,
        "Hbar_drift",
        cmp.report.reduced_hamiltonian_drift,
        1e-9,
    );
    let zero_mudot = cmp
        .reduced
        .fields
        .iter()
        .all(|f| f.mutilde_dot.iter().all(|v| *v == 0.0));
    pass &= zero_mudot;
    detail.push(format!("mutilde_dot_identically_zero={zero_mudot}"));
    Ok((
        c1,
        Outcome {
            pass,
            detail: detail.join(" "),
        },
    ))
}

/// Hand-derived snakeboard connection and curvature.
fn snakeboard_oracle(r: f64, theta: f64, phi: f64) -> (DMatrix<f64>, [f64; 3]) {
    let cot = 1.0 / phi.tan();
    let csc2 = 1.0 / phi.sin().powi(2);
    let a = DMatrix::from_row_slice(
        3,
        2,
        &[
            r * cot * theta.cos(),
            0.0,
            r * cot * theta.sin(),
            0.0,
            0.0,
            0.0,
        ],
    );
    (a, [r * theta.cos() * csc2, r * theta.sin() * csc2, 0.0])
}

fn c3() -> symred::Result<Outcome> {
    let (mut a_err, mut b_err) = (0.0f64, 0.0f64);
    for r in [1.0, 2.0] {
        let p = snakeboard(r);
        for i in 0..10 {
            for j in 0..10 {
                let theta = TAU * i as f64 / 10.0;
                let phi = 0.3 + 0.9 * j as f64 / 9.0;
                let xbar = dvector![theta, phi];
                let (a_ref, b_ref) = snakeboard_oracle(r, theta, phi);
                a_err = a_err.max((local_coefficients(&p, &xbar)? - a_ref).amax());
                let c = curvature(&p, &xbar)?;
                for (blk, b) in c.b.iter().zip(b_ref) {
                    let expected = DMatrix::from_row_slice(2, 2, &[0.0, b, -b, 0.0]);
                    b_err = b_err.max((blk - expected).amax());
                }
            }
        }
    }
    let (mut pass, mut detail) = (true, Vec::new());
    measure(&mut pass, &mut detail, "A_err", a_err, 1e-5);
    measure(&mut pass, &mut detail, "B_err", b_err, 1e-5);
    Ok(Outcome {
        pass,
        detail: detail.join(" "),
    })
}

fn c4() -> symred::Result<Outcome> {
    let abelian = snakeboard(1.0);
    let kinematic = build_snakeboard(1.0, SnakeboardSymmetry::R2).unwrap();
    let (mut d_abelian, mut d_kinematic) = (0.0f64, 0.0f64);
    for (x, _, _) in abelian.samples(50) {
        let (theta, phi) = (x[2], x[4]);
        let x1 = DVector::from_row_slice(&[theta.cos(), theta.sin(), -phi.tan(), 0.0, 0.0]);
        let expected = DMatrix::from_columns(&[
            x1.clone(),
            DVector::from_row_slice(&[0.0, 0.0, 0.0, 0.0, 1.0]),
        ]);
        let h = horizontal_space(&abelian.system, &abelian.cost, &abelian.symmetry, &x)?;
        d_abelian = d_abelian.max(subspace_distance(&h.columns, &expected));
        let h = horizontal_space(&kinematic.system, &kinematic.cost, &kinematic.symmetry, &x)?;
        d_kinematic = d_kinematic.max(subspace_distance(&h.columns, &kinematic.system.frame(&x)?));
    }
    let (mut pass, mut detail) = (true, Vec::new());
    measure(&mut pass, &mut detail, "dist_R2xSO2", d_abelian, 1e-8);
    measure(&mut pass, &mut detail, "dist_R2", d_kinematic, 1e-8);
    let degenerate = matches!(
        horizontal_space(
            &abelian.system,
            &abelian.cost,
            &abelian.symmetry,
            &dvector![0.0, 0.0, 0.3, 0.0, 0.0]
        ),
        Err(Error::DegenerateOnZeroMomentum { .. })
    );
    pass &= degenerate;
    detail.push(format!("phi0_degenerate={degenerate}"));
    Ok(Outcome {
        pass,
        detail: detail.join(" "),
    })
}

fn c5() -> symred::Result<Outcome> {
    let (mut pass, mut detail) = (true, Vec::new());
    for p in built_ins() {
        let xg: Vec<_> = p.samples(100).into_iter().map(|(x, _, g)| (x, g)).collect();
        let worst = check_connection_invariance(&p, &xg)?
            .into_iter()
            .fold(0.0, f64::max);
        measure(&mut pass, &mut detail, &label(&p), worst, 1e-6);
    }
    Ok(Outcome {
        pass,
        detail: detail.join(" "),
    })
}

fn c6() -> symred::Result<Outcome> {
    let inertia = [1.0f64, 2.0, 3.0];
    let rb: Problem = build_rigid_body(inertia, &[0, 1, 2])?;
    let mu0 = dvector![1.0, 0.5, 0.25];
    let rs0 = ReducedState::new(&rb, DVector::zeros(0), DVector::zeros(0), mu0.clone())?;
    let rt = integrate_reduced(&rb, &rs0, 0.0, 10.0, 1e-3)?;
    let c0 = mu0.norm_squared();
    let h = rt.hamiltonian();
    let casimir = rt
        .states
        .iter()
        .map(|s| (s.mutilde.norm_squared() - c0).abs())
        .fold(0.0, f64::max)
        / c0;
    let energy = h.iter().map(|v| (v - h[0]).abs()).fold(0.0, f64::max) / h[0].abs();

    // Euler right-hand side: mu x I^{-1} mu.
    let mut euler = 0.0f64;
    for mu in [
        mu0.clone(),
        dvector![-0.3, 2.0, 0.7],
        dvector![1.0, 1.0, 1.0],
        dvector![0.0, -1.5, 0.2],
    ] {
        let omega = DVector::from_fn(3, |i, _| mu[i] / inertia[i]);
        let expected = mu.cross(&omega);
        euler = euler.max((lie_poisson_field(&rb, &mu)?.1 - expected).amax());
    }

    let cmp = compare_full_reduced(
        &rb,
        &CotangentState::new(DVector::zeros(3), mu0)?,
        0.0,
        1.0,
        1e-3,
    )?;
    let (mut pass, mut detail) = (true, Vec::new());
    measure(&mut pass, &mut detail, "casimir_rel", casimir, 1e-9);
    measure(&mut pass, &mut detail, "Hbar_rel", energy, 1e-9);
    measure(&mut pass, &mut detail, "euler_rhs_err", euler, 1e-12);
    measure(
        &mut pass,
        &mut detail,
        "full_vs_reduced_mu",
        cmp.report.max_momentum_deviation,
        1e-6,
    );
    Ok(Outcome {
        pass,
        detail: detail.join(" "),
    })
}

fn c7() -> symred::Result<Outcome> {
    let hz = build_heisenberg()?;
    let mu = 1.0;
    let rs0 = ReducedState::new(&hz, dvector![0.0, 0.0], dvector![1.0, 0.0], dvector![mu])?;
    let h = 1e-3;
    let rt = integrate_reduced(&hz, &rs0, 0.0, 2.0, h)?;
    let v: Vec<DVector<f64>> = rt.fields.iter().map(|f| f.xbar_dot.clone()).collect();
    let speed0 = v[0].norm();
    let speed = v
        .iter()
        .map(|w| (w.norm() - speed0).abs())
        .fold(0.0, f64::max);
    let mut turning = 0.0f64;
    for i in 1..v.len() - 1 {
        let acc = (&v[i + 1] - &v[i - 1]) / (2.0 * h);
        let rate = (v[i][0] * acc[1] - v[i][1] * acc[0]) / v[i].norm_squared();
        turning = turning.max((rate.abs() - mu.abs()).abs());
    }
    let (mut pass, mut detail) = (true, Vec::new());
    measure(&mut pass, &mut detail, "speed_dev", speed, 1e-8);
    measure(&mut pass, &mut detail, "turning_rate_dev", turning, 1e-6);
    Ok(Outcome {
        pass,
        detail: detail.join(" "),
    })
}

fn c8() -> symred::Result<Outcome> {
    let p = snakeboard(1.0);
    let x0 = dvector![0.0, 0.0, 0.0, 0.0, 0.8];
    let l0 = DVector::from_row_slice(&LAMBDA0);
    let traj = integrate_canonical(
        &p.system,
        &p.cost,
        None,
        &CotangentState::new(x0.clone(), l0.clone())?,
        0.0,
        1.0,
        1e-3,
    )?;
    let x1 = traj.states.last().unwrap().x.clone();
    let perturbed = &l0 + dvector![2e-2, 1e-2, -1e-2, 2e-2, 1e-2];
    let sp = ShootingProblem {
        problem: &p,
        x0: x0.clone(),
        x1: x1.clone(),
        t0: 0.0,
        t1: 1.0,
        h: 1e-3,
        guess: perturbed.clone(),
        options: NewtonOptions::default(),
    };
    let full = shoot_full(&sp)?;
    let rs = reduce_costate(&p, &CotangentState::new(x0, perturbed)?)?;
    let guess = DVector::from_iterator(5, rs.lambdabar.iter().chain(rs.mutilde.iter()).copied());
    let red = shoot_reduced(&ShootingProblem { guess, ..sp })?;
    let end_full = (full.configurations.last().unwrap() - &x1).norm();
    let end_red = (red.configurations.last().unwrap() - &x1).norm();
    let (mut pass, mut detail) = (true, Vec::new());
    measure(&mut pass, &mut detail, "endpoint_full", end_full, 1e-8);
    measure(&mut pass, &mut detail, "endpoint_reduced", end_red, 1e-8);
    measure(
        &mut pass,
        &mut detail,
        "cost_gap",
        (full.cost - red.cost).abs(),
        1e-6,
    );
    let dims = full.integrated_dim == 10 && red.integrated_dim == 7;
    let psi =
        red.eliminated.len() == 1 && red.eliminated[0] == (2, x1[3]) && red.unknowns[4] == x1[3];
    pass &= full.converged && red.converged && dims && psi;
    detail.push(format!(
        "dims={}/{} psi_eliminated={psi} iterations={}/{}",
        full.integrated_dim, red.integrated_dim, full.iterations, red.iterations
    ));
    Ok(Outcome {
        pass,
        detail: detail.join(" "),
    })
}

fn c9() -> symred::Result<Outcome> {
    let (mut pass, mut detail) = (true, Vec::new());
    for p in built_ins() {
        let report = verify_problem(&p, 100, 1e-6);
        let worst = [
            "symmetry.dynamics",
            "symmetry.drift",
            "symmetry.distribution",
            "symmetry.cost",
        ]
        .iter()
        .map(|n| report.check(n).map_or(f64::INFINITY, |c| c.max_residual))
        .fold(0.0, f64::max);
        pass &= report.passed;
        detail.push(format!(
            "{}={}({worst:.1e})",
            label(&p),
            if report.passed { "ok" } else { "FAILED" }
        ));
    }
    let broken = build_snakeboard_broken(1.0)?;
    let report = verify_problem(&broken, 100, 1e-6);
    let residual = report
        .check("symmetry.dynamics")
        .map_or(0.0, |c| c.max_residual);
    let caught = !report.passed && residual > 1e-2;
    pass &= caught;
    detail.push(format!(
        "broken_action_residual={residual:.3e}>1e-2:{caught}"
    ));
    Ok(Outcome {
        pass,
        detail: detail.join(" "),
    })
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, symred::Result<Outcome>)> = Vec::new();
    match c1_c2() {
        Ok((a, b)) => {
            results.push(("1 snakeboard full/reduced equivalence", Ok(a)));
            results.push(("2 conservation", Ok(b)));
        }
        Err(e) => {
            results.push(("1 snakeboard full/reduced equivalence", Err(e.clone())));
            results.push(("2 conservation", Err(e)));
        }
    }
    results.push(("3 connection/curvature oracle", c3()));
    results.push(("4 connection construction", c4()));
    results.push(("5 connection invariance", c5()));
    results.push(("6 Lie-Poisson rigid body", c6()));
    results.push(("7 Wong circular arcs", c7()));
    results.push(("8 shooting equivalence", c8()));
    results.push(("9 symmetry verification", c9()));

    let mut all = true;
    for (name, r) in results {
        match r {
            Ok(o) => {
                all &= o.pass;
                println!(
                    "criterion {name}: {} {}",
                    if o.pass { "PASS" } else { "FAIL" },
                    o.detail
                );
            }
            Err(e) => {
                all = false;
                println!("criterion {name}: FAIL error: {e}");
            }
        }
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
