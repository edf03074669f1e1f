//! Problem definitions and the built-in instances.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::connection::ConnectionFrame;
use crate::control::{AffineControlSystem, Cost, SymmetrySpec};
use crate::error::{check_dim, Error, Result};
use crate::geometry::{so3, GroupAction, LieGroupSpec};
use crate::scalar::Real;

/// Closed-form `(A, B)` at a shape point, used as a test oracle.
pub type ConnectionOracle<T> =
    Arc<dyn Fn(&DVector<T>) -> (DMatrix<T>, Vec<DMatrix<T>>) + Send + Sync>;

/// A body-momentum component whose locked velocity is `coefficient * mutilde_index`
/// and whose connection row vanishes, so its group coordinate moves linearly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoupledMomentum<T: Real> {
    pub index: usize,
    pub coefficient: T,
}

/// Boxes used for Halton sampling of `(x, u, g)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleDomain {
    pub state: Vec<(f64, f64)>,
    pub control: (f64, f64),
    pub group: Vec<(f64, f64)>,
}

#[derive(Clone)]
pub struct ProblemDefinition<T: Real> {
    pub name: String,
    pub parameters: Vec<(String, f64)>,
    pub system: AffineControlSystem<T>,
    pub cost: Cost<T>,
    pub symmetry: SymmetrySpec<T>,
    pub decoupled: Vec<DecoupledMomentum<T>>,
    pub sampling: SampleDomain,
    pub oracle: Option<ConnectionOracle<T>>,
}

impl<T: Real> fmt::Debug for ProblemDefinition<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemDefinition")
            .field("name", &self.name)
            .field("parameters", &self.parameters)
            .field("system", &self.system)
            .field("cost", &self.cost)
            .field("symmetry", &self.symmetry)
            .finish()
    }
}

/// `(x, u, g)` triple for symmetry checks.
pub type Sample<T> = (DVector<T>, DVector<T>, DVector<T>);

impl<T: Real> ProblemDefinition<T> {
    pub fn new(
        name: impl Into<String>,
        system: AffineControlSystem<T>,
        cost: Cost<T>,
        symmetry: SymmetrySpec<T>,
        sampling: SampleDomain,
    ) -> Result<Self> {
        check_dim(
            "action dimension",
            system.state_dim(),
            symmetry.action.dim(),
        )?;
        check_dim("state sample box", system.state_dim(), sampling.state.len())?;
        check_dim("group sample box", symmetry.k(), sampling.group.len())?;
        Ok(Self {
            name: name.into(),
            parameters: Vec::new(),
            system,
            cost,
            symmetry,
            decoupled: Vec::new(),
            sampling,
            oracle: None,
        })
    }

    pub fn m(&self) -> usize {
        self.system.state_dim()
    }

    pub fn d(&self) -> usize {
        self.system.control_dim()
    }

    pub fn k(&self) -> usize {
        self.symmetry.k()
    }

    pub fn s(&self) -> usize {
        self.symmetry.s()
    }

    pub fn frame_at(&self, x: &DVector<T>) -> Result<ConnectionFrame<T>> {
        ConnectionFrame::at(&self.system, &self.cost, &self.symmetry, x)
    }

    /// `n` Halton-distributed `(x, u, g)` samples from the problem's sample boxes.
    pub fn samples(&self, n: usize) -> Vec<Sample<T>> {
        let m = self.m();
        let d = self.d();
        let k = self.k();
        (0..n)
            .map(|i| {
                let p = halton_point(i + HALTON_SKIP, m + d + k);
                let scale = |u: f64, (lo, hi): (f64, f64)| T::c(lo + (hi - lo) * u);
                let x = DVector::from_fn(m, |j, _| scale(p[j], self.sampling.state[j]));
                let u = DVector::from_fn(d, |j, _| scale(p[m + j], self.sampling.control));
                let g = DVector::from_fn(k, |j, _| scale(p[m + d + j], self.sampling.group[j]));
                (x, u, g)
            })
            .collect()
    }
}

const HALTON_SKIP: usize = 20;
const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Radical inverse of `index` in `base`.
pub fn halton(mut index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

/// Point `index` of the Halton sequence in `dim` dimensions (at most 16).
pub fn halton_point(index: usize, dim: usize) -> Vec<f64> {
    assert!(
        dim <= PRIMES.len(),
        "Halton sampling supports at most {} dimensions",
        PRIMES.len()
    );
    (0..dim)
        .map(|j| halton(index as u64 + 1, PRIMES[j]))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnakeboardSymmetry {
    R2,
    R2xSO2,
}

impl std::str::FromStr for SnakeboardSymmetry {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "R2" | "r2" => Ok(Self::R2),
            "R2xSO2" | "r2xso2" => Ok(Self::R2xSO2),
            other => Err(Error::InvalidParameter(format!(
                "unknown snakeboard symmetry {other:?} (expected R2 or R2xSO2)"
            ))),
        }
    }
}

fn snakeboard_system<T: Real>(r: T) -> AffineControlSystem<T> {
    AffineControlSystem::new(
        5,
        3,
        Arc::new(move |x: &DVector<T>| {
            let (theta, phi) = (x[2], x[4]);
            let z = T::zero();
            let o = T::one();
            DMatrix::from_column_slice(
                5,
                3,
                &[
                    theta.cos(),
                    theta.sin(),
                    -phi.tan() / r,
                    z,
                    z,
                    z,
                    z,
                    z,
                    o,
                    z,
                    z,
                    z,
                    z,
                    z,
                    o,
                ],
            )
        }),
    )
}

fn snakeboard_sampling() -> SampleDomain {
    SampleDomain {
        state: vec![(-2.0, 2.0), (-2.0, 2.0), (-PI, PI), (-PI, PI), (0.3, 1.2)],
        control: (-2.0, 2.0),
        group: vec![(-5.0, 5.0), (-5.0, 5.0), (-PI, PI)],
    }
}

/// Snakeboard on `SE(2) x S^1 x S^1` with coordinates `(x1, x2, theta, psi, phi)`.
pub fn build_snakeboard<T: Real>(
    r: T,
    symmetry: SnakeboardSymmetry,
) -> Result<ProblemDefinition<T>> {
    if !(r > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "snakeboard radius must be positive, got {r}"
        )));
    }
    let (group, shape, group_idx, name) = match symmetry {
        SnakeboardSymmetry::R2xSO2 => (
            LieGroupSpec::abelian("R2xSO2", 3),
            vec![2, 4],
            vec![0, 1, 3],
            "snakeboard-R2xSO2",
        ),
        SnakeboardSymmetry::R2 => (
            LieGroupSpec::abelian("R2", 2),
            vec![2, 3, 4],
            vec![0, 1],
            "snakeboard-R2",
        ),
    };
    let action = GroupAction::left_translation(group.clone(), shape, group_idx)?;
    let mut sampling = snakeboard_sampling();
    if symmetry == SnakeboardSymmetry::R2 {
        sampling.group.truncate(2);
    }
    let mut p = ProblemDefinition::new(
        name,
        snakeboard_system(r),
        Cost::identity(3),
        SymmetrySpec::new(group, action)?,
        sampling,
    )?;
    p.parameters = vec![("r".into(), r.as_f64())];
    let oracle: ConnectionOracle<T> = match symmetry {
        SnakeboardSymmetry::R2xSO2 => {
            p.decoupled = vec![DecoupledMomentum {
                index: 2,
                coefficient: T::one(),
            }];
            Arc::new(move |xbar: &DVector<T>| {
                let (theta, phi) = (xbar[0], xbar[1]);
                let cot = phi.cos() / phi.sin();
                let csc2 = T::one() / (phi.sin() * phi.sin());
                let mut a = DMatrix::zeros(3, 2);
                a[(0, 0)] = r * theta.cos() * cot;
                a[(1, 0)] = r * theta.sin() * cot;
                let mut b = vec![DMatrix::zeros(2, 2); 3];
                for (i, v) in [(0, r * theta.cos() * csc2), (1, r * theta.sin() * csc2)] {
                    b[i][(0, 1)] = v;
                    b[i][(1, 0)] = -v;
                }
                (a, b)
            })
        }
        SnakeboardSymmetry::R2 => Arc::new(move |xbar: &DVector<T>| {
            let (theta, phi) = (xbar[0], xbar[2]);
            let cot = phi.cos() / phi.sin();
            let csc2 = T::one() / (phi.sin() * phi.sin());
            let mut a = DMatrix::zeros(2, 3);
            a[(0, 0)] = r * theta.cos() * cot;
            a[(1, 0)] = r * theta.sin() * cot;
            let mut b = vec![DMatrix::zeros(3, 3); 2];
            for (i, v) in [(0, r * theta.cos() * csc2), (1, r * theta.sin() * csc2)] {
                b[i][(0, 2)] = v;
                b[i][(2, 0)] = -v;
            }
            (a, b)
        }),
    };
    p.oracle = Some(oracle);
    Ok(p)
}

/// Snakeboard whose "symmetry" translates the heading `theta` instead of `psi`.
/// The fields depend on `theta`, so equivariance fails; used as a negative control.
pub fn build_snakeboard_broken<T: Real>(r: T) -> Result<ProblemDefinition<T>> {
    if !(r > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "snakeboard radius must be positive, got {r}"
        )));
    }
    let group = LieGroupSpec::abelian("R2xR", 3);
    let action = GroupAction::left_translation(group.clone(), vec![3, 4], vec![0, 1, 2])?;
    let mut p = ProblemDefinition::new(
        "snakeboard-broken",
        snakeboard_system(r),
        Cost::identity(3),
        SymmetrySpec::new(group, action)?,
        snakeboard_sampling(),
    )?;
    p.parameters = vec![("r".into(), r.as_f64())];
    Ok(p)
}

/// Rigid body on `SO(3)` in exponential coordinates, left-invariant controls
/// on the `actuated` axes (zero-based), cost `1/2 sum I_i u_i^2`.
pub fn build_rigid_body<T: Real>(
    inertia: [T; 3],
    actuated: &[usize],
) -> Result<ProblemDefinition<T>> {
    if inertia.iter().any(|i| !(*i > T::zero())) {
        return Err(Error::InvalidParameter(
            "inertia entries must be positive".into(),
        ));
    }
    let mut axes = actuated.to_vec();
    axes.sort_unstable();
    axes.dedup();
    if axes.is_empty() || axes.iter().any(|&a| a > 2) {
        return Err(Error::InvalidParameter(format!(
            "actuated axes must be a non-empty subset of {{0,1,2}}, got {actuated:?}"
        )));
    }
    let group = so3::so3_group::<T>();
    let action = GroupAction::left_translation(group.clone(), vec![], vec![0, 1, 2])?;
    let d = axes.len();
    let cols = axes.clone();
    let system = AffineControlSystem::new(
        3,
        d,
        Arc::new(move |x: &DVector<T>| {
            let jinv = so3::right_jacobian_inverse(x);
            DMatrix::from_fn(3, cols.len(), |i, j| jinv[(i, cols[j])])
        }),
    );
    let cost = Cost::diagonal(axes.iter().map(|&a| inertia[a]).collect());
    let sampling = SampleDomain {
        state: vec![(-0.7, 0.7); 3],
        control: (-2.0, 2.0),
        group: vec![(-0.7, 0.7); 3],
    };
    let mut p = ProblemDefinition::new(
        "rigid-body",
        system,
        cost,
        SymmetrySpec::new(group, action)?,
        sampling,
    )?;
    p.parameters = vec![
        ("I1".into(), inertia[0].as_f64()),
        ("I2".into(), inertia[1].as_f64()),
        ("I3".into(), inertia[2].as_f64()),
    ];
    p.parameters
        .extend(axes.iter().map(|a| (format!("actuated{}", a + 1), 1.0)));
    p.oracle = Some(Arc::new(|_| {
        (DMatrix::zeros(3, 0), vec![DMatrix::zeros(0, 0); 3])
    }));
    Ok(p)
}

/// Heisenberg system on `R^3` with `X1 = dx - (y/2) dz`, `X2 = dy + (x/2) dz`,
/// symmetric under `z`-translation.
pub fn build_heisenberg<T: Real>() -> Result<ProblemDefinition<T>> {
    let half = T::c(0.5);
    let system = AffineControlSystem::new(
        3,
        2,
        Arc::new(move |x: &DVector<T>| {
            let (z, o) = (T::zero(), T::one());
            DMatrix::from_column_slice(3, 2, &[o, z, -x[1] * half, z, o, x[0] * half])
        }),
    );
    let group = LieGroupSpec::abelian("R", 1);
    let action = GroupAction::left_translation(group.clone(), vec![0, 1], vec![2])?;
    let sampling = SampleDomain {
        state: vec![(-2.0, 2.0); 3],
        control: (-2.0, 2.0),
        group: vec![(-5.0, 5.0)],
    };
    let mut p = ProblemDefinition::new(
        "heisenberg",
        system,
        Cost::identity(2),
        SymmetrySpec::new(group, action)?,
        sampling,
    )?;
    p.oracle = Some(Arc::new(move |xbar: &DVector<T>| {
        let a = DMatrix::from_row_slice(1, 2, &[xbar[1] * half, -xbar[0] * half]);
        let b = DMatrix::from_row_slice(2, 2, &[T::zero(), -T::one(), T::one(), T::zero()]);
        (a, vec![b])
    }));
    Ok(p)
}

/// Names of the built-in problems.
pub const BUILT_IN: [&str; 4] = [
    "snakeboard",
    "rigid-body",
    "heisenberg",
    "snakeboard-broken",
];
