#![allow(dead_code)]

use nalgebra::{dvector, DVector};
use symred::problems::{build_snakeboard, SnakeboardSymmetry};
use symred::Problem;

pub fn snakeboard(r: f64) -> Problem {
    build_snakeboard(r, SnakeboardSymmetry::R2xSO2).unwrap()
}

pub fn snakeboard_r2(r: f64) -> Problem {
    build_snakeboard(r, SnakeboardSymmetry::R2).unwrap()
}

/// Snakeboard state `(x1, x2, theta, psi, phi)`.
pub fn sb_x(theta: f64, phi: f64) -> DVector<f64> {
    dvector![0.0, 0.0, theta, 0.0, phi]
}

/// Hand-derived right-hand side of the optimal snakeboard equations.
pub fn snakeboard_rhs(r: f64, x: &DVector<f64>, l: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
    let (th, ph) = (x[2], x[4]);
    let p = l[0] * th.cos() + l[1] * th.sin() - l[2] * ph.tan() / r;
    let xdot = dvector![p * th.cos(), p * th.sin(), -p * ph.tan() / r, l[3], l[4]];
    let sec2 = 1.0 / (ph.cos() * ph.cos());
    let ldot = dvector![
        0.0,
        0.0,
        -p * (-l[0] * th.sin() + l[1] * th.cos()),
        0.0,
        p * l[2] * sec2 / r
    ];
    (xdot, ldot)
}

/// Closed-form snakeboard optimal Hamiltonian.
pub fn snakeboard_h(r: f64, x: &DVector<f64>, l: &DVector<f64>) -> f64 {
    let (th, ph) = (x[2], x[4]);
    let p = l[0] * th.cos() + l[1] * th.sin() - l[2] * ph.tan() / r;
    0.5 * (p * p + l[3] * l[3] + l[4] * l[4])
}

/// Closed-form reduced snakeboard Hamiltonian.
pub fn snakeboard_hbar(r: f64, phi: f64, lambdabar: &DVector<f64>, mu: &DVector<f64>) -> f64 {
    0.5 * (lambdabar[0] * lambdabar[0] * phi.tan().powi(2) / (r * r)
        + lambdabar[1] * lambdabar[1]
        + mu[2] * mu[2])
}
