//! Symmetry reduction for affine optimal control systems.
//!
//! The pipeline runs from a problem definition (affine control fields, a cost,
//! and a free group action on a trivialized chart) through the Pontryagin
//! Hamiltonian flow, a principal connection built from the momentum map, the
//! reduced Hamilton–Poincaré equations with group reconstruction, and shooting
//! solvers for fixed-endpoint problems in both coordinate systems.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`.
//!
//! ```
//! use nalgebra::dvector;
//! use symred::problems::{build_snakeboard, SnakeboardSymmetry};
//! use symred::suite::compare_full_reduced;
//! use symred::Costate;
//!
//! let p = build_snakeboard(1.0, SnakeboardSymmetry::R2xSO2)?;
//! let s0 = Costate::new(dvector![0.0, 0.0, 0.3, 0.0, 0.8], dvector![0.2, -0.1, 1.0, 0.5, 0.4])?;
//! let cmp = compare_full_reduced(&p, &s0, 0.0, 1.0, 1e-3)?;
//! assert!(cmp.report.max_configuration_deviation < 1e-6);
//! # Ok::<(), symred::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bvp;
pub mod connection;
pub mod control;
pub mod error;
pub mod geometry;
pub mod io;
pub mod ode;
pub mod pmp;
pub mod problems;
pub mod reduction;
pub mod scalar;
pub mod suite;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Vector = nalgebra::DVector<f64>;
pub type Matrix = nalgebra::DMatrix<f64>;
pub type Problem = problems::ProblemDefinition<f64>;
pub type Group = geometry::LieGroupSpec<f64>;
pub type Action = geometry::GroupAction<f64>;
pub type System = control::AffineControlSystem<f64>;
pub type Cost = control::Cost<f64>;
pub type Symmetry = control::SymmetrySpec<f64>;
pub type Costate = pmp::CotangentState<f64>;
pub type FullTrajectory = pmp::Trajectory<f64>;
pub type ReducedState = reduction::ReducedState<f64>;
pub type ReducedTrajectory = reduction::ReducedTrajectory<f64>;
pub type ConnectionData = connection::LocalConnectionData<f64>;
pub type Shooting<'a> = bvp::ShootingProblem<'a, f64>;
pub type ShootingResult = bvp::ShootingResult<f64>;
