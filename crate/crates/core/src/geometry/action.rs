//! Group actions on a trivialized chart `x = (xbar, g)`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::diff::{curve_velocity, try_numeric_jacobian};
use super::group::LieGroupSpec;
use crate::error::{check_dim, Error, Result};
use crate::scalar::Real;

pub type ActionFn<T> = Arc<dyn Fn(&DVector<T>, &DVector<T>) -> Result<DVector<T>> + Send + Sync>;

/// `Phi: (g, x) -> g x` together with the split of chart coordinates into
/// shape and group blocks.
///
/// Reduction assumes the split is a left trivialization: acting with `h` on
/// `(xbar, g)` gives `(xbar, h g)`.
#[derive(Clone)]
pub struct GroupAction<T: Real> {
    map: ActionFn<T>,
    shape_indices: Vec<usize>,
    group_indices: Vec<usize>,
}

impl<T: Real> fmt::Debug for GroupAction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GroupAction")
            .field("shape_indices", &self.shape_indices)
            .field("group_indices", &self.group_indices)
            .finish()
    }
}

impl<T: Real> GroupAction<T> {
    pub fn new(
        map: ActionFn<T>,
        shape_indices: Vec<usize>,
        group_indices: Vec<usize>,
    ) -> Result<Self> {
        let m = shape_indices.len() + group_indices.len();
        let mut seen = vec![false; m];
        for &i in shape_indices.iter().chain(group_indices.iter()) {
            if i >= m || seen[i] {
                return Err(Error::InvalidParameter(format!(
                    "shape and group indices must partition 0..{m}"
                )));
            }
            seen[i] = true;
        }
        Ok(Self {
            map,
            shape_indices,
            group_indices,
        })
    }

    /// Left multiplication on the group block, identity on the shape block.
    pub fn left_translation(
        group: LieGroupSpec<T>,
        shape_indices: Vec<usize>,
        group_indices: Vec<usize>,
    ) -> Result<Self> {
        check_dim("group block", group.dim(), group_indices.len())?;
        let gi = group_indices.clone();
        let map: ActionFn<T> = Arc::new(move |g, x| {
            let current = DVector::from_fn(gi.len(), |i, _| x[gi[i]]);
            let moved = group.multiply(g, &current)?;
            let mut out = x.clone();
            for (i, &j) in gi.iter().enumerate() {
                out[j] = moved[i];
            }
            Ok(out)
        });
        Self::new(map, shape_indices, group_indices)
    }

    pub fn dim(&self) -> usize {
        self.shape_indices.len() + self.group_indices.len()
    }

    pub fn shape_dim(&self) -> usize {
        self.shape_indices.len()
    }

    pub fn shape_indices(&self) -> &[usize] {
        &self.shape_indices
    }

    pub fn group_indices(&self) -> &[usize] {
        &self.group_indices
    }

    pub fn apply(&self, g: &DVector<T>, x: &DVector<T>) -> Result<DVector<T>> {
        check_dim("configuration", self.dim(), x.len())?;
        let out = (self.map)(g, x)?;
        check_dim("action output", self.dim(), out.len())?;
        Ok(out)
    }

    pub fn split(&self, x: &DVector<T>) -> (DVector<T>, DVector<T>) {
        let xbar = DVector::from_fn(self.shape_indices.len(), |i, _| x[self.shape_indices[i]]);
        let g = DVector::from_fn(self.group_indices.len(), |i, _| x[self.group_indices[i]]);
        (xbar, g)
    }

    pub fn assemble(&self, xbar: &DVector<T>, g: &DVector<T>) -> Result<DVector<T>> {
        check_dim("shape point", self.shape_indices.len(), xbar.len())?;
        check_dim("group element", self.group_indices.len(), g.len())?;
        let mut x = DVector::zeros(self.dim());
        for (i, &j) in self.shape_indices.iter().enumerate() {
            x[j] = xbar[i];
        }
        for (i, &j) in self.group_indices.iter().enumerate() {
            x[j] = g[i];
        }
        Ok(x)
    }

    /// Shape vector embedded as a tangent vector with zero group part.
    pub fn embed_shape(&self, vbar: &DVector<T>) -> DVector<T> {
        let mut v = DVector::zeros(self.dim());
        for (i, &j) in self.shape_indices.iter().enumerate() {
            v[j] = vbar[i];
        }
        v
    }

    /// `xi_M(x) = d/de Phi(exp(e xi), x)` at `e = 0`.
    pub fn infinitesimal_generator(
        &self,
        group: &LieGroupSpec<T>,
        xi: &DVector<T>,
        x: &DVector<T>,
    ) -> Result<DVector<T>> {
        check_dim("algebra vector", group.dim(), xi.len())?;
        curve_velocity(|eps| self.apply(&group.exp_coords(&(xi * eps))?, x))
    }

    /// `m x k` matrix whose columns are `(e_a)_M(x)`.
    pub fn generator_matrix(&self, group: &LieGroupSpec<T>, x: &DVector<T>) -> Result<DMatrix<T>> {
        let k = group.dim();
        let mut out = DMatrix::zeros(self.dim(), k);
        for a in 0..k {
            let e = DVector::from_fn(k, |i, _| if i == a { T::one() } else { T::zero() });
            out.set_column(a, &self.infinitesimal_generator(group, &e, x)?);
        }
        Ok(out)
    }

    /// Tangent map `T_x Phi_g` by central differences.
    pub fn pushforward(&self, g: &DVector<T>, x: &DVector<T>) -> Result<DMatrix<T>> {
        try_numeric_jacobian(|y| self.apply(g, y), x)
    }

    /// Residuals of `Phi(e, x) = x` and `Phi(g, Phi(h, x)) = Phi(gh, x)`.
    pub fn axiom_residuals(
        &self,
        group: &LieGroupSpec<T>,
        g: &DVector<T>,
        h: &DVector<T>,
        x: &DVector<T>,
    ) -> Result<(T, T)> {
        let identity = (self.apply(&group.identity(), x)? - x).amax();
        let nested = self.apply(g, &self.apply(h, x)?)?;
        let direct = self.apply(&group.multiply(g, h)?, x)?;
        Ok((identity, (nested - direct).amax()))
    }
}
