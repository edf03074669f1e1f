//! Lie group specifications in a single chart.
//!
//! Two chart kinds are supported. `AbelianTranslation` is `R^k` under
//! addition. `Matrix` groups use exponential coordinates
//! `g = exp(sum_a g^a E_a)` for an algebra basis `E_a`, which makes the
//! exponential of an algebra vector equal to that vector in chart coordinates.
//!
//! Structure constants follow `[e_b, e_c] = C^a_{bc} e_a`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::scalar::Real;

pub type MatrixExpFn<T> = Arc<dyn Fn(&DMatrix<T>) -> DMatrix<T> + Send + Sync>;
pub type MatrixLogFn<T> = Arc<dyn Fn(&DMatrix<T>) -> Result<DMatrix<T>> + Send + Sync>;

/// A matrix Lie group described by an algebra basis and a matrix logarithm.
#[derive(Clone)]
pub struct MatrixGroup<T: Real> {
    basis: Vec<DMatrix<T>>,
    projector: DMatrix<T>,
    exp_override: Option<MatrixExpFn<T>>,
    log: MatrixLogFn<T>,
    chart_radius: Option<T>,
}

#[derive(Clone)]
pub enum GroupKind<T: Real> {
    AbelianTranslation,
    Matrix(MatrixGroup<T>),
}

#[derive(Clone)]
pub struct LieGroupSpec<T: Real> {
    name: String,
    dim: usize,
    kind: GroupKind<T>,
    structure: Vec<T>,
}

impl<T: Real> fmt::Debug for LieGroupSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LieGroupSpec")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("abelian_translation", &self.is_abelian_translation())
            .finish()
    }
}

fn commutator<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    a * b - b * a
}

impl<T: Real> MatrixGroup<T> {
    /// `log` maps a group matrix to an algebra matrix; `exp_override` replaces
    /// the generic scaling-and-squaring exponential.
    pub fn new(
        basis: Vec<DMatrix<T>>,
        log: MatrixLogFn<T>,
        exp_override: Option<MatrixExpFn<T>>,
        chart_radius: Option<T>,
    ) -> Result<Self> {
        let n = basis.first().map(|b| b.nrows()).unwrap_or(0);
        if basis.is_empty() || basis.iter().any(|b| b.nrows() != n || b.ncols() != n) {
            return Err(Error::InvalidParameter(
                "algebra basis must be non-empty square matrices of one size".into(),
            ));
        }
        let k = basis.len();
        let flat = DMatrix::from_fn(n * n, k, |i, a| basis[a][(i / n, i % n)]);
        let gram = flat.transpose() * &flat;
        let inv = gram.try_inverse().ok_or_else(|| {
            Error::InvalidParameter("algebra basis matrices are linearly dependent".into())
        })?;
        let projector = inv * flat.transpose();
        Ok(Self {
            basis,
            projector,
            exp_override,
            log,
            chart_radius,
        })
    }

    pub fn basis(&self) -> &[DMatrix<T>] {
        &self.basis
    }

    pub fn chart_radius(&self) -> Option<T> {
        self.chart_radius
    }

    pub fn algebra_matrix(&self, xi: &DVector<T>) -> DMatrix<T> {
        let n = self.basis[0].nrows();
        let mut out = DMatrix::zeros(n, n);
        for (a, e) in self.basis.iter().enumerate() {
            out += e * xi[a];
        }
        out
    }

    /// Coordinates of an algebra matrix in the basis (least squares).
    pub fn algebra_coords(&self, mat: &DMatrix<T>) -> DVector<T> {
        let n = mat.nrows();
        let flat = DVector::from_fn(n * n, |i, _| mat[(i / n, i % n)]);
        &self.projector * flat
    }

    fn exp_matrix(&self, alg: &DMatrix<T>) -> DMatrix<T> {
        match &self.exp_override {
            Some(f) => f(alg),
            None => alg.clone().exp(),
        }
    }
}

impl<T: Real> LieGroupSpec<T> {
    pub fn abelian(name: impl Into<String>, dim: usize) -> Self {
        Self {
            name: name.into(),
            dim,
            kind: GroupKind::AbelianTranslation,
            structure: vec![T::zero(); dim * dim * dim],
        }
    }

    /// Builds a matrix group; structure constants come from basis commutators
    /// and are checked for antisymmetry and the Jacobi identity.
    pub fn matrix(name: impl Into<String>, group: MatrixGroup<T>) -> Result<Self> {
        let k = group.basis.len();
        let mut structure = vec![T::zero(); k * k * k];
        for b in 0..k {
            for c in 0..k {
                let coords = group.algebra_coords(&commutator(&group.basis[b], &group.basis[c]));
                for a in 0..k {
                    structure[(a * k + b) * k + c] = coords[a];
                }
            }
        }
        let spec = Self {
            name: name.into(),
            dim: k,
            kind: GroupKind::Matrix(group),
            structure,
        };
        let (antisym, jacobi) = spec.structure_residuals();
        let tol = T::c(1e-12);
        if antisym > tol || jacobi > tol {
            return Err(Error::InvalidParameter(format!(
                "structure constants violate antisymmetry ({antisym:e}) or Jacobi ({jacobi:e})"
            )));
        }
        Ok(spec)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &GroupKind<T> {
        &self.kind
    }

    pub fn is_abelian_translation(&self) -> bool {
        matches!(self.kind, GroupKind::AbelianTranslation)
    }

    /// `C^a_{bc}`.
    pub fn structure_constant(&self, a: usize, b: usize, c: usize) -> T {
        self.structure[(a * self.dim + b) * self.dim + c]
    }

    /// True when every structure constant vanishes exactly.
    pub fn is_commutative(&self) -> bool {
        self.structure.iter().all(|c| *c == T::zero())
    }

    /// Largest antisymmetry and Jacobi-identity violations of `C`.
    pub fn structure_residuals(&self) -> (T, T) {
        let k = self.dim;
        let mut antisym = T::zero();
        let mut jacobi = T::zero();
        for a in 0..k {
            for b in 0..k {
                for c in 0..k {
                    antisym = antisym.max(
                        (self.structure_constant(a, b, c) + self.structure_constant(a, c, b)).abs(),
                    );
                    for e in 0..k {
                        // [[e_b, e_c], e_e] + cyclic, component along e_a.
                        let mut sum = T::zero();
                        for f in 0..k {
                            sum += self.structure_constant(f, b, c)
                                * self.structure_constant(a, f, e)
                                + self.structure_constant(f, c, e)
                                    * self.structure_constant(a, f, b)
                                + self.structure_constant(f, e, b)
                                    * self.structure_constant(a, f, c);
                        }
                        jacobi = jacobi.max(sum.abs());
                    }
                }
            }
        }
        (antisym, jacobi)
    }

    pub fn identity(&self) -> DVector<T> {
        DVector::zeros(self.dim)
    }

    fn check_chart(&self, g: &DVector<T>) -> Result<()> {
        check_dim("group element", self.dim, g.len())?;
        if let GroupKind::Matrix(mg) = &self.kind {
            if let Some(radius) = mg.chart_radius {
                let norm = g.norm();
                if !(norm < radius) {
                    return Err(Error::ChartDomain {
                        norm: norm.as_f64(),
                        radius: radius.as_f64(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Group matrix of a chart point (matrix groups only).
    pub fn to_matrix(&self, g: &DVector<T>) -> Result<DMatrix<T>> {
        self.check_chart(g)?;
        match &self.kind {
            GroupKind::Matrix(mg) => Ok(mg.exp_matrix(&mg.algebra_matrix(g))),
            GroupKind::AbelianTranslation => Err(Error::WrongProblemShape {
                expected: "matrix group",
            }),
        }
    }

    /// Chart point of a group matrix (matrix groups only).
    pub fn from_matrix(&self, mat: &DMatrix<T>) -> Result<DVector<T>> {
        match &self.kind {
            GroupKind::Matrix(mg) => {
                let coords = mg.algebra_coords(&(mg.log)(mat)?);
                self.check_chart(&coords)?;
                Ok(coords)
            }
            GroupKind::AbelianTranslation => Err(Error::WrongProblemShape {
                expected: "matrix group",
            }),
        }
    }

    pub fn multiply(&self, g: &DVector<T>, h: &DVector<T>) -> Result<DVector<T>> {
        check_dim("group element", self.dim, g.len())?;
        check_dim("group element", self.dim, h.len())?;
        match &self.kind {
            GroupKind::AbelianTranslation => Ok(g + h),
            GroupKind::Matrix(_) => {
                let prod = self.to_matrix(g)? * self.to_matrix(h)?;
                self.from_matrix(&prod)
            }
        }
    }

    /// Inverse; in both chart kinds this is negation of the coordinates.
    pub fn inverse(&self, g: &DVector<T>) -> Result<DVector<T>> {
        self.check_chart(g)?;
        Ok(-g)
    }

    /// Chart coordinates of `exp(xi)`.
    pub fn exp_coords(&self, xi: &DVector<T>) -> Result<DVector<T>> {
        self.check_chart(xi)?;
        Ok(xi.clone())
    }

    /// Local difference `g ⊖ reference`: `g - reference` for translations,
    /// `log(reference^{-1} g)` for matrix groups.
    pub fn difference(&self, g: &DVector<T>, reference: &DVector<T>) -> Result<DVector<T>> {
        match &self.kind {
            GroupKind::AbelianTranslation => {
                check_dim("group element", self.dim, g.len())?;
                check_dim("group element", self.dim, reference.len())?;
                Ok(g - reference)
            }
            GroupKind::Matrix(_) => self.multiply(&self.inverse(reference)?, g),
        }
    }

    /// `Ad_g` as a `k x k` matrix in the algebra basis.
    pub fn adjoint(&self, g: &DVector<T>) -> Result<DMatrix<T>> {
        self.check_chart(g)?;
        match &self.kind {
            GroupKind::AbelianTranslation => Ok(DMatrix::identity(self.dim, self.dim)),
            GroupKind::Matrix(mg) => {
                let gm = self.to_matrix(g)?;
                let gi = self.to_matrix(&-g)?;
                let mut ad = DMatrix::zeros(self.dim, self.dim);
                for (a, e) in mg.basis.iter().enumerate() {
                    ad.set_column(a, &mg.algebra_coords(&(&gm * e * &gi)));
                }
                Ok(ad)
            }
        }
    }

    /// `[xi, eta]^a = C^a_{bc} xi^b eta^c`.
    pub fn bracket(&self, xi: &DVector<T>, eta: &DVector<T>) -> Result<DVector<T>> {
        check_dim("algebra vector", self.dim, xi.len())?;
        check_dim("algebra vector", self.dim, eta.len())?;
        let k = self.dim;
        Ok(DVector::from_fn(k, |a, _| {
            let mut s = T::zero();
            for b in 0..k {
                for c in 0..k {
                    s += self.structure_constant(a, b, c) * xi[b] * eta[c];
                }
            }
            s
        }))
    }

    /// `(ad*_xi mu)_a = mu_b C^b_{ca} xi^c`.
    pub fn ad_star(&self, xi: &DVector<T>, mu: &DVector<T>) -> Result<DVector<T>> {
        check_dim("algebra vector", self.dim, xi.len())?;
        check_dim("algebra covector", self.dim, mu.len())?;
        let k = self.dim;
        Ok(DVector::from_fn(k, |a, _| {
            let mut s = T::zero();
            for b in 0..k {
                for c in 0..k {
                    s += mu[b] * self.structure_constant(b, c, a) * xi[c];
                }
            }
            s
        }))
    }

    /// `Ad*_g mu` in components, i.e. `Ad_g^T mu`.
    pub fn coadjoint(&self, g: &DVector<T>, mu: &DVector<T>) -> Result<DVector<T>> {
        check_dim("algebra covector", self.dim, mu.len())?;
        Ok(self.adjoint(g)?.transpose() * mu)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::so3;
    use proptest::prelude::*;

    fn v3(a: f64, b: f64, c: f64) -> DVector<f64> {
        DVector::from_vec(vec![a, b, c])
    }

    #[test]
    fn abelian_has_trivial_algebra() {
        let g = LieGroupSpec::<f64>::abelian("R3", 3);
        assert_eq!(
            g.ad_star(&v3(1.0, 2.0, 3.0), &v3(-1.0, 0.5, 4.0)).unwrap(),
            v3(0.0, 0.0, 0.0)
        );
        assert_eq!(
            g.adjoint(&v3(5.0, -2.0, 0.7)).unwrap(),
            DMatrix::identity(3, 3)
        );
        assert!(g.is_commutative());
    }

    #[test]
    fn so3_structure_constants_are_levi_civita() {
        let g = so3::so3_group::<f64>();
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    let eps = ((a as i32 - b as i32)
                        * (b as i32 - c as i32)
                        * (c as i32 - a as i32)) as f64
                        / 2.0;
                    assert!((g.structure_constant(a, b, c) - eps).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn so3_ad_star_is_cross_product() {
        let g = so3::so3_group::<f64>();
        let xi = v3(1.0, 0.5, 1.0 / 3.0);
        let mu = v3(1.0, 1.0, 1.0);
        // Brute-force contraction with Levi-Civita.
        let mut expected = v3(0.0, 0.0, 0.0);
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    let eps = ((b as i32 - c as i32)
                        * (c as i32 - a as i32)
                        * (a as i32 - b as i32)) as f64
                        / 2.0;
                    expected[a] += mu[b] * eps * xi[c];
                }
            }
        }
        let got = g.ad_star(&xi, &mu).unwrap();
        assert!((&got - &expected).amax() < 1e-15);
        assert!((got - v3(-1.0 / 6.0, 2.0 / 3.0, -0.5)).amax() < 1e-15);
        assert!(
            g.ad_star(&v3(0.0, 0.0, 1.0 / 3.0), &v3(0.0, 0.0, 1.0))
                .unwrap()
                .amax()
                < 1e-16
        );
    }

    #[test]
    fn so3_adjoint_of_quarter_turn() {
        let g = so3::so3_group::<f64>();
        let q = v3(0.0, 0.0, std::f64::consts::FRAC_PI_2);
        let ad = g.adjoint(&q).unwrap();
        // Conjugation oracle: R hat(e_a) R^T = hat(R e_a), so Ad_g = R.
        let r = g.to_matrix(&q).unwrap();
        let expected =
            DMatrix::from_row_slice(3, 3, &[0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        assert!((&ad - &expected).amax() < 1e-14);
        assert!((&ad - &r).amax() < 1e-14);
        assert!((g.adjoint(&g.identity()).unwrap() - DMatrix::identity(3, 3)).amax() < 1e-15);
    }

    #[test]
    fn generic_exponential_matches_rodrigues() {
        let so3 = so3::so3_group::<f64>();
        let GroupKind::Matrix(mg) = so3.kind() else {
            unreachable!()
        };
        let plain = MatrixGroup::new(
            mg.basis().to_vec(),
            Arc::new(|m: &DMatrix<f64>| Ok(so3::log_matrix(m))),
            None,
            None,
        )
        .unwrap();
        let generic = LieGroupSpec::matrix("so3-generic", plain).unwrap();
        let g = v3(0.4, -1.1, 0.9);
        assert!((generic.to_matrix(&g).unwrap() - so3.to_matrix(&g).unwrap()).amax() < 1e-13);
    }

    #[test]
    fn chart_exit_is_reported() {
        let g = so3::so3_group::<f64>();
        assert!(matches!(
            g.adjoint(&v3(3.1, 0.0, 0.0)),
            Err(Error::ChartDomain { .. })
        ));
    }

    proptest! {
        #[test]
        fn ad_star_is_dual_to_bracket(x in proptest::collection::vec(-2.0f64..2.0, 9)) {
            let g = so3::so3_group::<f64>();
            let xi = v3(x[0], x[1], x[2]);
            let eta = v3(x[3], x[4], x[5]);
            let mu = v3(x[6], x[7], x[8]);
            let lhs = g.ad_star(&xi, &mu).unwrap().dot(&eta);
            let rhs = mu.dot(&g.bracket(&xi, &eta).unwrap());
            prop_assert!((lhs - rhs).abs() < 1e-12);
            let twice = g.ad_star(&(&xi * 2.0), &mu).unwrap();
            prop_assert!((twice - g.ad_star(&xi, &mu).unwrap() * 2.0).amax() < 1e-12);
        }

        #[test]
        fn so3_multiplication_is_associative(x in proptest::collection::vec(-0.9f64..0.9, 9)) {
            let g = so3::so3_group::<f64>();
            let a = v3(x[0], x[1], x[2]);
            let b = v3(x[3], x[4], x[5]);
            let c = v3(x[6], x[7], x[8]) * 0.3;
            let left = g.multiply(&g.multiply(&a, &b).unwrap(), &c);
            let right = g.multiply(&a, &g.multiply(&b, &c).unwrap());
            if let (Ok(l), Ok(r)) = (left, right) {
                prop_assert!((l - r).amax() < 1e-10);
            }
            let inv = g.multiply(&a, &g.inverse(&a).unwrap()).unwrap();
            prop_assert!(inv.amax() < 1e-12);
        }
    }
}
