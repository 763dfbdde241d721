//! Quadrature, orthonormal polynomial bases, L2 projectors and the
//! Raviart–Thomas–Nédélec space on triangles and segments.

mod basis;
mod cell;
mod quadrature;
mod rtn;

pub use basis::{dim_poly2, orthonormalize, ScalarBasis, ScaledMonomials, VectorBasis, VectorTabulation};
pub use cell::{Cell, CellFace};
pub use quadrature::{quadrature_rule, Entity, QuadratureRule, MAX_QUADRATURE_DEGREE};
pub use rtn::{rtn_dim, rtn_interpolate, RtnBasis};

use nalgebra::{DMatrix, DVector};

use crate::{Error, Point, Result};

/// Default quadrature degree for non-polynomial integrands at polynomial degree `k`.
pub fn default_quadrature_degree(k: usize) -> usize {
    2 * (k + 2) + 2
}

/// L2-orthogonal projection of `f` onto the span of `basis`, integrating
/// `f` with a rule of the given degree.
pub fn l2_project(
    basis: &ScalarBasis,
    entity: Entity,
    f: impl Fn(&Point) -> f64,
    quad_degree: usize,
) -> Result<DVector<f64>> {
    let n = basis.dim();
    if n == 0 {
        return Ok(DVector::zeros(0));
    }
    let degree = basis.degree().unwrap_or(0);
    let gram_rule = quadrature_rule(entity, 2 * degree)?;
    let mut gram = DMatrix::zeros(n, n);
    for (p, w) in gram_rule.iter() {
        let phi = basis.values(p);
        gram.ger(w, &phi, &phi, 1.0);
    }
    let rule = quadrature_rule(entity, quad_degree.max(2 * degree))?;
    let mut rhs = DVector::zeros(n);
    for (p, w) in rule.iter() {
        rhs.axpy(w * f(p), &basis.values(p), 1.0);
    }
    let chol = gram.cholesky().ok_or(Error::Singular { what: "projection Gram" })?;
    Ok(chol.solve(&rhs))
}

/// Componentwise projection of a vector field; returns the x-coefficients
/// followed by the y-coefficients.
pub fn l2_project_vector(
    basis: &ScalarBasis,
    entity: Entity,
    f: impl Fn(&Point) -> Point,
    quad_degree: usize,
) -> Result<DVector<f64>> {
    let x = l2_project(basis, entity, |p| f(p).x, quad_degree)?;
    let y = l2_project(basis, entity, |p| f(p).y, quad_degree)?;
    let mut out = DVector::zeros(x.len() + y.len());
    out.rows_mut(0, x.len()).copy_from(&x);
    out.rows_mut(x.len(), y.len()).copy_from(&y);
    Ok(out)
}
