mod common;

use common::*;
use nalgebra::{dvector, DVector};
use symred::bvp::{shoot_full, shoot_reduced, simpson, NewtonOptions, ShootingProblem};
use symred::pmp::{integrate_canonical, CotangentState};
use symred::problems::{build_heisenberg, build_rigid_body};
use symred::reduction::{integrate_and_reconstruct, reduce_costate, ReducedState};
use symred::{Error, Problem};

const LAMBDA0: [f64; 5] = [0.2, -0.1, 1.0, 0.5, 0.4];

fn x0() -> DVector<f64> {
    dvector![0.0, 0.0, 0.3, 0.0, 0.8]
}

fn forward_endpoint(
    p: &Problem,
    x0: &DVector<f64>,
    lambda0: &DVector<f64>,
    t1: f64,
) -> DVector<f64> {
    let s0 = CotangentState::new(x0.clone(), lambda0.clone()).unwrap();
    integrate_canonical(&p.system, &p.cost, None, &s0, 0.0, t1, 1e-3)
        .unwrap()
        .states
        .last()
        .unwrap()
        .x
        .clone()
}

fn problem<'a>(p: &'a Problem, x1: DVector<f64>, guess: DVector<f64>) -> ShootingProblem<'a, f64> {
    ShootingProblem {
        problem: p,
        x0: x0(),
        x1,
        t0: 0.0,
        t1: 1.0,
        h: 1e-3,
        guess,
        options: NewtonOptions::default(),
    }
}

#[test]
fn full_round_trip_takes_one_iteration() {
    let p = snakeboard(1.0);
    let l0 = DVector::from_row_slice(&LAMBDA0);
    let x1 = forward_endpoint(&p, &x0(), &l0, 1.0);
    let res = shoot_full(&problem(&p, x1, l0.clone())).unwrap();
    assert!(res.converged);
    assert_eq!(res.iterations, 1);
    assert!(res.residual <= 1e-12);
    assert_eq!(res.unknowns, l0);
    assert_eq!(res.integrated_dim, 10);
}

#[test]
fn full_recovers_costate_from_perturbed_guess() {
    let p = snakeboard(1.0);
    let l0 = DVector::from_row_slice(&LAMBDA0);
    let x1 = forward_endpoint(&p, &x0(), &l0, 1.0);
    let guess = &l0 + DVector::from_row_slice(&[1e-2, -1e-2, 1e-2, 1e-2, -1e-2]);
    let res = shoot_full(&problem(&p, x1, guess)).unwrap();
    assert!(res.residual <= 1e-10);
    assert!((res.unknowns - l0).amax() < 1e-6);
    assert!(res.residual_history.len() >= 2);
}

#[test]
fn infeasible_horizon_reports_max_iterations() {
    let p = snakeboard(1.0);
    let mut sp = problem(
        &p,
        dvector![50.0, -40.0, 2.0, 30.0, 0.8],
        DVector::from_row_slice(&LAMBDA0),
    );
    sp.t1 = 0.01;
    match shoot_full(&sp) {
        Err(Error::MaxIterations { last_iterate, .. }) => assert_eq!(last_iterate.len(), 5),
        other => panic!("expected max-iterations, got {other:?}"),
    }
}

#[test]
fn reduced_round_trip_takes_one_iteration() {
    let p = snakeboard(1.0);
    let s0 = CotangentState::new(x0(), DVector::from_row_slice(&LAMBDA0)).unwrap();
    let rs0 = reduce_costate(&p, &s0).unwrap();
    let rt = integrate_and_reconstruct(&p, &rs0, 0.0, 1.0, 1e-3).unwrap();
    let last = rt.states.last().unwrap();
    let x1 = p.symmetry.action.assemble(&last.xbar, &last.g).unwrap();
    let guess = DVector::from_iterator(5, rs0.lambdabar.iter().chain(rs0.mutilde.iter()).copied());
    let res = shoot_reduced(&problem(&p, x1, guess)).unwrap();
    assert_eq!(res.iterations, 1);
    assert!(res.residual <= 1e-12);
    assert_eq!(res.integrated_dim, 7);
}

#[test]
fn full_and_reduced_shooting_agree() {
    let p = snakeboard(1.0);
    let l0 = DVector::from_row_slice(&LAMBDA0);
    let x1 = forward_endpoint(&p, &x0(), &l0, 1.0);
    let perturbed = &l0 + DVector::from_row_slice(&[2e-2, 1e-2, -1e-2, 2e-2, 1e-2]);
    let full = shoot_full(&problem(&p, x1.clone(), perturbed.clone())).unwrap();
    let rs = reduce_costate(&p, &CotangentState::new(x0(), perturbed).unwrap()).unwrap();
    let guess = DVector::from_iterator(5, rs.lambdabar.iter().chain(rs.mutilde.iter()).copied());
    let red = shoot_reduced(&problem(&p, x1.clone(), guess)).unwrap();
    assert!(full.residual <= 1e-8 && red.residual <= 1e-8);
    assert!(
        (full.cost - red.cost).abs() <= 1e-6,
        "{} vs {}",
        full.cost,
        red.cost
    );
    let dev = full
        .configurations
        .iter()
        .zip(&red.configurations)
        .map(|(a, b)| (a - b).amax())
        .fold(0.0, f64::max);
    assert!(dev <= 1e-5, "{dev:e}");
    // Cost oracle: 1/2 |u|^2 = H for drift-free unit-metric problems, constant along the extremal.
    let h = snakeboard_h(1.0, &x0(), &full.unknowns);
    assert!((full.cost - h).abs() < 1e-8);
}

#[test]
fn psi_momentum_is_eliminated_in_closed_form() {
    let p = snakeboard(1.0);
    let x1 = forward_endpoint(&p, &x0(), &DVector::from_row_slice(&LAMBDA0), 1.0);
    let rs = reduce_costate(
        &p,
        &CotangentState::new(x0(), DVector::from_row_slice(&LAMBDA0)).unwrap(),
    )
    .unwrap();
    // The psi slot of the guess is far off; it never enters the iteration.
    let guess = DVector::from_iterator(5, rs.lambdabar.iter().chain(rs.mutilde.iter()).copied())
        + dvector![1e-2, 0.0, 0.0, -1e-2, 3.0];
    let res = shoot_reduced(&problem(&p, x1.clone(), guess)).unwrap();
    let expected = (x1[3] - 0.0) / 1.0;
    assert_eq!(res.eliminated.len(), 1);
    assert_eq!(res.eliminated[0], (2, expected));
    assert_eq!(res.unknowns[4], expected);
}

#[test]
fn heisenberg_and_rigid_body_reduced_shooting() {
    let hz = build_heisenberg::<f64>().unwrap();
    let rs0 =
        ReducedState::new(&hz, dvector![0.0, 0.0], dvector![1.0, 0.0], dvector![1.0]).unwrap();
    let rt = integrate_and_reconstruct(&hz, &rs0, 0.0, 1.0, 1e-3).unwrap();
    let last = rt.states.last().unwrap();
    let x1 = hz.symmetry.action.assemble(&last.xbar, &last.g).unwrap();
    let sp = ShootingProblem {
        problem: &hz,
        x0: DVector::zeros(3),
        x1: x1.clone(),
        t0: 0.0,
        t1: 1.0,
        h: 1e-3,
        guess: dvector![0.9, 0.1, 0.8],
        options: NewtonOptions::default(),
    };
    let red = shoot_reduced(&sp).unwrap();
    assert!((red.unknowns.clone() - dvector![1.0, 0.0, 1.0]).amax() < 1e-6);
    let full = shoot_full(&ShootingProblem {
        guess: dvector![0.9, 0.1, 0.8],
        ..sp
    })
    .unwrap();
    assert!((full.cost - red.cost).abs() < 1e-6);

    let rb = build_rigid_body::<f64>([1.0, 2.0, 3.0], &[0, 1, 2]).unwrap();
    let x1 = dvector![0.4, -0.2, 0.3];
    let sp = ShootingProblem {
        problem: &rb,
        x0: DVector::zeros(3),
        x1: x1.clone(),
        t0: 0.0,
        t1: 1.0,
        h: 1e-3,
        guess: dvector![0.4, -0.4, 0.9],
        options: NewtonOptions::default(),
    };
    let red = shoot_reduced(&sp).unwrap();
    let full = shoot_full(&sp).unwrap();
    assert!((full.configurations.last().unwrap() - &x1).amax() < 1e-8);
    assert!((red.configurations.last().unwrap() - &x1).amax() < 1e-8);
    assert!(
        (full.cost - red.cost).abs() < 1e-6,
        "{} {}",
        full.cost,
        red.cost
    );
}

#[test]
fn simpson_matches_closed_form_integral() {
    let n = 1000;
    let h = 1.0 / n as f64;
    let v: Vec<f64> = (0..=n).map(|i| (i as f64 * h).sin()).collect();
    assert!((simpson(&v, h) - (1.0 - 1f64.cos())).abs() < 1e-13);
}
