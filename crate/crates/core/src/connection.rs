//! Principal connection built from the momentum map and the drift-free
//! Legendre map, with local coefficients, curvature, and kinematic classification.
//!
//! `H_x = FH_df(J^{-1}(0) ∩ T*_x M)` where `FH_df(alpha) = g^{ij} <alpha, X_i> X_j`.

use nalgebra::{DMatrix, DVector, LU};
use serde::Serialize;

use crate::control::{AffineControlSystem, Cost, SymmetrySpec};
use crate::error::{check_dim, Error, Result};
use crate::geometry::diff::step_for;
use crate::geometry::subspace::{complement, hstack, orthonormalize, rank, subspace_distance};
use crate::problems::ProblemDefinition;
use crate::scalar::Real;

/// Orthonormal basis of a subspace of `T_x M`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionBasis<T: Real> {
    pub base: DVector<T>,
    pub columns: DMatrix<T>,
}

impl<T: Real> DistributionBasis<T> {
    pub fn dim(&self) -> usize {
        self.columns.ncols()
    }
}

/// `A^a_alpha` (`k x s`) and `B^a_{alpha beta}` (`k` antisymmetric `s x s` blocks) at a shape point.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalConnectionData<T: Real> {
    pub at: DVector<T>,
    pub a: DMatrix<T>,
    pub b: Vec<DMatrix<T>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KinematicClass {
    pub dim_d: usize,
    pub dim_v: usize,
    /// `dim(D ∩ V)`.
    pub dim_s: usize,
    /// `dim(U)` for `V = S ⊕ U`.
    pub dim_u: usize,
    pub purely_kinematic: bool,
    pub dimension_assumption_holds: bool,
}

/// `V_x`, the tangent space to the orbit.
pub fn vertical_space<T: Real>(
    sym: &SymmetrySpec<T>,
    x: &DVector<T>,
) -> Result<DistributionBasis<T>> {
    let gens = sym.action.generator_matrix(&sym.group, x)?;
    let q = orthonormalize(&gens);
    if q.ncols() < sym.k() {
        return Err(Error::NonFreeAction {
            rank: q.ncols(),
            expected: sym.k(),
        });
    }
    Ok(DistributionBasis {
        base: x.clone(),
        columns: q,
    })
}

fn inverse_metric<T: Real>(
    sys: &AffineControlSystem<T>,
    cost: &Cost<T>,
    x: &DVector<T>,
) -> Result<DMatrix<T>> {
    let g = cost.metric(x, sys.control_dim())?;
    let chol = g.cholesky().ok_or(Error::SingularMetric)?;
    Ok(chol.inverse())
}

/// `FH_df(alpha) = g^{ij} <alpha, X_i(x)> X_j(x)`.
pub fn drift_free_legendre<T: Real>(
    sys: &AffineControlSystem<T>,
    cost: &Cost<T>,
    x: &DVector<T>,
    alpha: &DVector<T>,
) -> Result<DVector<T>> {
    check_dim("covector", sys.state_dim(), alpha.len())?;
    let frame = sys.frame(x)?;
    Ok(&frame * (inverse_metric(sys, cost, x)? * (frame.transpose() * alpha)))
}

/// Everything needed to split tangent vectors at one configuration.
#[derive(Debug, Clone)]
pub struct ConnectionFrame<T: Real> {
    pub x: DVector<T>,
    pub generators: DMatrix<T>,
    pub horizontal: DMatrix<T>,
    decomposition: LU<T, nalgebra::Dyn, nalgebra::Dyn>,
}

impl<T: Real> ConnectionFrame<T> {
    pub fn at(
        sys: &AffineControlSystem<T>,
        cost: &Cost<T>,
        sym: &SymmetrySpec<T>,
        x: &DVector<T>,
    ) -> Result<Self> {
        let m = sys.state_dim();
        let k = sym.k();
        let generators = sym.action.generator_matrix(&sym.group, x)?;
        let r = rank(&generators);
        if r < k {
            return Err(Error::NonFreeAction {
                rank: r,
                expected: k,
            });
        }
        // Covectors annihilating every generator, in the Euclidean identification.
        let zero_momentum = complement(&generators);
        let frame = sys.frame(x)?;
        let image = &frame * (inverse_metric(sys, cost, x)? * (frame.transpose() * zero_momentum));
        let horizontal = orthonormalize(&image);
        if horizontal.ncols() < m - k {
            return Err(Error::DegenerateOnZeroMomentum {
                rank: horizontal.ncols(),
                expected: m - k,
            });
        }
        let combined = hstack(&horizontal, &generators);
        let r = rank(&combined);
        if r < m {
            return Err(Error::ConnectionFailure {
                rank: r,
                expected: m,
            });
        }
        let decomposition = combined.lu();
        Ok(Self {
            x: x.clone(),
            generators,
            horizontal,
            decomposition,
        })
    }

    /// `A_x(v)`: the unique `xi` with `v - xi_M(x)` horizontal.
    pub fn connection_form(&self, v: &DVector<T>) -> Result<DVector<T>> {
        check_dim("tangent vector", self.x.len(), v.len())?;
        let c = self
            .decomposition
            .solve(v)
            .ok_or(Error::SingularDecomposition)?;
        let h = self.horizontal.ncols();
        Ok(c.rows(h, c.len() - h).into_owned())
    }

    /// Applies the connection form to each column of `vs`.
    pub fn connection_form_columns(&self, vs: &DMatrix<T>) -> Result<DMatrix<T>> {
        let c = self
            .decomposition
            .solve(vs)
            .ok_or(Error::SingularDecomposition)?;
        let h = self.horizontal.ncols();
        Ok(c.rows(h, c.nrows() - h).into_owned())
    }

    /// Horizontal lifts of the shape coordinate directions, as `m x s` columns.
    pub fn shape_lifts(&self, sym: &SymmetrySpec<T>) -> Result<DMatrix<T>> {
        let s = sym.s();
        let embedded = DMatrix::from_fn(self.x.len(), s, |i, alpha| {
            if sym.action.shape_indices()[alpha] == i {
                T::one()
            } else {
                T::zero()
            }
        });
        let a = self.connection_form_columns(&embedded)?;
        Ok(embedded - &self.generators * a)
    }

    pub fn horizontal_lift(&self, sym: &SymmetrySpec<T>, vbar: &DVector<T>) -> Result<DVector<T>> {
        check_dim("shape vector", sym.s(), vbar.len())?;
        Ok(self.shape_lifts(sym)? * vbar)
    }
}

/// `H_x = FH_df(J^{-1}(0) ∩ T*_x M)`.
pub fn horizontal_space<T: Real>(
    sys: &AffineControlSystem<T>,
    cost: &Cost<T>,
    sym: &SymmetrySpec<T>,
    x: &DVector<T>,
) -> Result<DistributionBasis<T>> {
    let frame = ConnectionFrame::at(sys, cost, sym, x)?;
    Ok(DistributionBasis {
        base: x.clone(),
        columns: frame.horizontal,
    })
}

/// `A_x(v)` relative to a precomputed horizontal space.
pub fn connection_form<T: Real>(
    sym: &SymmetrySpec<T>,
    hspace: &DistributionBasis<T>,
    v: &DVector<T>,
) -> Result<DVector<T>> {
    let generators = sym.action.generator_matrix(&sym.group, &hspace.base)?;
    let combined = hstack(&hspace.columns, &generators);
    check_dim("tangent vector", combined.nrows(), v.len())?;
    if combined.ncols() != combined.nrows() {
        return Err(Error::SingularDecomposition);
    }
    let c = combined.lu().solve(v).ok_or(Error::SingularDecomposition)?;
    let h = hspace.dim();
    Ok(c.rows(h, c.len() - h).into_owned())
}

/// Horizontal lift of a shape vector at `x`.
pub fn horizontal_lift<T: Real>(
    problem: &ProblemDefinition<T>,
    x: &DVector<T>,
    vbar: &DVector<T>,
) -> Result<DVector<T>> {
    problem
        .frame_at(x)?
        .horizontal_lift(&problem.symmetry, vbar)
}

/// Connection frame at the shape point `xbar` and group identity.
pub fn frame_at_shape<T: Real>(
    problem: &ProblemDefinition<T>,
    xbar: &DVector<T>,
) -> Result<ConnectionFrame<T>> {
    let x = problem
        .symmetry
        .action
        .assemble(xbar, &problem.symmetry.group.identity())?;
    problem.frame_at(&x)
}

/// `A^a_alpha(xbar)`, a `k x s` matrix.
pub fn local_coefficients<T: Real>(
    problem: &ProblemDefinition<T>,
    xbar: &DVector<T>,
) -> Result<DMatrix<T>> {
    coefficients_from_frame(problem, &frame_at_shape(problem, xbar)?)
}

pub(crate) fn coefficients_from_frame<T: Real>(
    problem: &ProblemDefinition<T>,
    frame: &ConnectionFrame<T>,
) -> Result<DMatrix<T>> {
    let sym = &problem.symmetry;
    let embedded = DMatrix::from_fn(frame.x.len(), sym.s(), |i, alpha| {
        if sym.action.shape_indices()[alpha] == i {
            T::one()
        } else {
            T::zero()
        }
    });
    frame.connection_form_columns(&embedded)
}

/// Frames at `xbar` and at `xbar ± h e_alpha`, shared by curvature and the reduced field.
#[derive(Debug, Clone)]
pub struct ShapeStencil<T: Real> {
    pub xbar: DVector<T>,
    pub center: ConnectionFrame<T>,
    pub plus: Vec<ConnectionFrame<T>>,
    pub minus: Vec<ConnectionFrame<T>>,
    pub plus_points: Vec<DVector<T>>,
    pub minus_points: Vec<DVector<T>>,
    pub widths: Vec<T>,
}

impl<T: Real> ShapeStencil<T> {
    pub fn new(problem: &ProblemDefinition<T>, xbar: &DVector<T>) -> Result<Self> {
        check_dim("shape point", problem.s(), xbar.len())?;
        let center = frame_at_shape(problem, xbar)?;
        let s = xbar.len();
        let mut plus = Vec::with_capacity(s);
        let mut minus = Vec::with_capacity(s);
        let mut plus_points = Vec::with_capacity(s);
        let mut minus_points = Vec::with_capacity(s);
        let mut widths = Vec::with_capacity(s);
        for alpha in 0..s {
            let h = step_for(xbar[alpha]);
            let mut p = xbar.clone();
            let mut q = xbar.clone();
            p[alpha] += h;
            q[alpha] -= h;
            widths.push(p[alpha] - q[alpha]);
            plus.push(frame_at_shape(problem, &p)?);
            minus.push(frame_at_shape(problem, &q)?);
            plus_points.push(p);
            minus_points.push(q);
        }
        Ok(Self {
            xbar: xbar.clone(),
            center,
            plus,
            minus,
            plus_points,
            minus_points,
            widths,
        })
    }

    /// `A` and `B` at the stencil center.
    pub fn connection_data(
        &self,
        problem: &ProblemDefinition<T>,
    ) -> Result<LocalConnectionData<T>> {
        let a = coefficients_from_frame(problem, &self.center)?;
        let s = self.xbar.len();
        let k = problem.k();
        // d[alpha] = dA/dxbar^alpha, k x s
        let mut d = Vec::with_capacity(s);
        for alpha in 0..s {
            let ap = coefficients_from_frame(problem, &self.plus[alpha])?;
            let am = coefficients_from_frame(problem, &self.minus[alpha])?;
            d.push((ap - am) / self.widths[alpha]);
        }
        let group = &problem.symmetry.group;
        let mut b = vec![DMatrix::zeros(s, s); k];
        for (aidx, block) in b.iter_mut().enumerate() {
            for alpha in 0..s {
                for beta in (alpha + 1)..s {
                    let mut value = d[alpha][(aidx, beta)] - d[beta][(aidx, alpha)];
                    for bi in 0..k {
                        for ci in 0..k {
                            value -= group.structure_constant(aidx, bi, ci)
                                * a[(bi, alpha)]
                                * a[(ci, beta)];
                        }
                    }
                    block[(alpha, beta)] = value;
                    block[(beta, alpha)] = -value;
                }
            }
        }
        Ok(LocalConnectionData {
            at: self.xbar.clone(),
            a,
            b,
        })
    }
}

/// `A` and `B = dA - C(A, A)` at `xbar`; `B` is exactly antisymmetric.
pub fn curvature<T: Real>(
    problem: &ProblemDefinition<T>,
    xbar: &DVector<T>,
) -> Result<LocalConnectionData<T>> {
    ShapeStencil::new(problem, xbar)?.connection_data(problem)
}

/// Dimension bookkeeping of `D`, `V`, and `S = D ∩ V` at `x`.
pub fn classify<T: Real>(
    sys: &AffineControlSystem<T>,
    sym: &SymmetrySpec<T>,
    x: &DVector<T>,
) -> Result<KinematicClass> {
    let d = sys.frame(x)?;
    let v = sym.action.generator_matrix(&sym.group, x)?;
    let dim_d = rank(&d);
    let dim_v = rank(&v);
    let dim_sum = rank(&hstack(&d, &v));
    let dim_s = dim_d + dim_v - dim_sum;
    Ok(KinematicClass {
        dim_d,
        dim_v,
        dim_s,
        dim_u: dim_v - dim_s,
        purely_kinematic: dim_s == 0,
        dimension_assumption_holds: dim_sum == sys.state_dim(),
    })
}

/// Principal-angle distance between `T Phi_g (H_x)` and `H_{gx}` per sample.
pub fn check_connection_invariance<T: Real>(
    problem: &ProblemDefinition<T>,
    samples: &[(DVector<T>, DVector<T>)],
) -> Result<Vec<T>> {
    let sym = &problem.symmetry;
    samples
        .iter()
        .map(|(x, g)| {
            if *g == sym.group.identity() {
                return Ok(T::zero());
            }
            let hx = problem.frame_at(x)?.horizontal;
            let gx = sym.action.apply(g, x)?;
            let hgx = problem.frame_at(&gx)?.horizontal;
            let pushed = sym.action.pushforward(g, x)? * hx;
            Ok(subspace_distance(&pushed, &hgx))
        })
        .collect()
}
