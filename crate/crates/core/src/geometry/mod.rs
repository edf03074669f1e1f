//! Charts, Lie groups, group actions and finite-difference primitives.

pub mod action;
pub mod diff;
pub mod group;
pub mod so3;
pub mod subspace;

pub use action::GroupAction;
pub use diff::{numeric_gradient, numeric_jacobian};
pub use group::{GroupKind, LieGroupSpec, MatrixGroup};
pub use subspace::subspace_distance;
