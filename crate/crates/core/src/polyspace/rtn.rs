use nalgebra::{DMatrix, DVector, LU};

use super::basis::{dim_poly2, orthonormalize, ScalarBasis, ScaledMonomials, VectorBasis};
use super::cell::Cell;
use super::quadrature::quadrature_rule;
use crate::{Error, Point, Result};

/// Dimension of `RTN^order(T)` on a triangle.
pub fn rtn_dim(order: usize) -> usize {
    order * (order + 2)
}

/// L2-orthonormal basis of the Raviart–Thomas–Nédélec space
/// `P^{order-1}(T)^2 + x P^{order-1}(T)` together with its moment interpolator.
#[derive(Debug, Clone)]
pub struct RtnBasis {
    order: usize,
    basis: VectorBasis,
    interior: ScalarBasis,
    faces: [ScalarBasis; 3],
    cell: Cell,
    moments: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl RtnBasis {
    pub fn new(cell: &Cell, order: usize) -> Result<Self> {
        assert!(order >= 1, "RTN spaces start at order 1");
        let entity = cell.entity();
        let monomials = ScaledMonomials::new(order, cell.centroid, cell.diameter);
        let nm = monomials.len();

        // P^{order-1}(T)^2 from an orthonormal scalar basis, padded to degree `order`
        let lower = ScalarBasis::new(entity, Some(order - 1))?;
        let (_, lower_coef) = lower.monomial_coefficients().expect("element basis");
        let n_lower = dim_poly2(order - 1);
        let mut span = DMatrix::zeros(2 * n_lower + order, 2 * nm);
        for i in 0..n_lower {
            for j in 0..n_lower {
                span[(2 * i, j)] = lower_coef[(i, j)];
                span[(2 * i + 1, nm + j)] = lower_coef[(i, j)];
            }
        }
        // (x - x_T) times homogeneous monomials of degree order-1
        for b in 0..order as i32 {
            let a = order as i32 - 1 - b;
            let row = 2 * n_lower + b as usize;
            span[(row, monomials.index_of(a + 1, b).unwrap())] = 1.0;
            span[(row, nm + monomials.index_of(a, b + 1).unwrap())] = 1.0;
        }

        let quad = quadrature_rule(entity, 2 * order)?;
        let scalar_gram = monomials.mass(&quad);
        let mut gram = DMatrix::zeros(2 * nm, 2 * nm);
        gram.view_mut((0, 0), (nm, nm)).copy_from(&scalar_gram);
        gram.view_mut((nm, nm), (nm, nm)).copy_from(&scalar_gram);
        let coef = orthonormalize(&span, &gram)?;
        let basis = VectorBasis::new(monomials, coef);

        let interior = ScalarBasis::new(entity, order.checked_sub(2))?;
        let faces = [0, 1, 2].map(|i| {
            ScalarBasis::new(cell.faces[i].entity(), Some(order - 1)).expect("face basis")
        });

        let mut this = Self {
            order,
            basis,
            interior,
            faces,
            cell: cell.clone(),
            moments: LU::new(DMatrix::zeros(0, 0)),
        };
        let n = this.dim();
        let m = this.apply_moments(n, |p| this.basis.values(p), 2 * order)?;
        if m.nrows() != n {
            return Err(Error::Mismatch("RTN moment count".into()));
        }
        let lu = m.lu();
        if !lu.is_invertible() || lu.u().diagonal().iter().any(|d| d.abs() < 1e-10) {
            return Err(Error::Singular { what: "RTN moment" });
        }
        this.moments = lu;
        Ok(this)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn basis(&self) -> &VectorBasis {
        &self.basis
    }

    pub fn cell(&self) -> &Cell {
        &self.cell
    }

    /// Moments of `count` vector fields: interior moments against
    /// `P^{order-2}(T)^2` followed by normal-trace moments against
    /// `P^{order-1}(F)` on each face.
    fn apply_moments(
        &self,
        count: usize,
        fields: impl Fn(&Point) -> Vec<Point>,
        degree: usize,
    ) -> Result<DMatrix<f64>> {
        let ni = self.interior.dim();
        let nf = self.order;
        let mut out = DMatrix::zeros(2 * ni + 3 * nf, count);
        if ni > 0 {
            let quad = quadrature_rule(self.cell.entity(), degree)?;
            for (p, w) in quad.iter() {
                let psi = self.interior.values(p);
                let v = fields(p);
                for (j, vj) in v.iter().enumerate() {
                    for i in 0..ni {
                        out[(i, j)] += w * psi[i] * vj.x;
                        out[(ni + i, j)] += w * psi[i] * vj.y;
                    }
                }
            }
        }
        for (f, face) in self.cell.faces.iter().enumerate() {
            let quad = quadrature_rule(face.entity(), degree)?;
            let offset = 2 * ni + f * nf;
            for (p, w) in quad.iter() {
                let phi = self.faces[f].values(p);
                let v = fields(p);
                for (j, vj) in v.iter().enumerate() {
                    let vn = vj.dot(&face.normal);
                    for i in 0..nf {
                        out[(offset + i, j)] += w * phi[i] * vn;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Interpolates `count` fields at once; column `j` of the result holds the
    /// RTN coefficients of field `j`.
    pub fn interpolate_many(
        &self,
        count: usize,
        fields: impl Fn(&Point) -> Vec<Point>,
        degree: usize,
    ) -> Result<DMatrix<f64>> {
        let rhs = self.apply_moments(count, fields, degree)?;
        Ok(self.moments.solve(&rhs).expect("moment matrix checked at construction"))
    }

    pub fn interpolate(&self, v: impl Fn(&Point) -> Point, degree: usize) -> Result<DVector<f64>> {
        let c = self.interpolate_many(1, |p| vec![v(p)], degree)?;
        Ok(c.column(0).into_owned())
    }

    pub fn evaluate(&self, c: &DVector<f64>, p: &Point) -> Point {
        self.basis.evaluate(c, p)
    }
}

/// Interpolates `v` into `RTN^order(T)` using quadrature of the given degree.
pub fn rtn_interpolate(
    cell: &Cell,
    order: usize,
    v: impl Fn(&Point) -> Point,
    quad_degree: usize,
) -> Result<DVector<f64>> {
    RtnBasis::new(cell, order)?.interpolate(v, quad_degree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyspace::{l2_project, ScalarBasis};

    fn cell() -> Cell {
        Cell::from_vertices([Point::new(0.1, 0.2), Point::new(0.8, 0.1), Point::new(0.4, 0.7)])
    }

    #[test]
    fn dimensions() {
        for l in 1..=4 {
            assert_eq!(RtnBasis::new(&cell(), l).unwrap().dim(), rtn_dim(l));
        }
    }

    #[test]
    fn constants_are_reproduced() {
        let c = cell();
        for l in 1..=3 {
            let rtn = RtnBasis::new(&c, l).unwrap();
            let coef = rtn.interpolate(|_| Point::new(1.0, 2.0), 6).unwrap();
            for p in c.vertices {
                assert!((rtn.evaluate(&coef, &p) - Point::new(1.0, 2.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn rtn_members_are_reproduced() {
        let c = cell();
        for l in 1..=3 {
            let rtn = RtnBasis::new(&c, l).unwrap();
            let coef = DVector::from_fn(rtn.dim(), |i, _| ((i * 7 + 3) % 11) as f64 / 5.0 - 1.0);
            let back = rtn.interpolate(|p| rtn.evaluate(&coef, p), 2 * l + 2).unwrap();
            assert!((back - &coef).norm() <= 1e-11 * coef.norm());
        }
    }

    #[test]
    fn full_polynomials_of_lower_degree_are_contained() {
        let c = cell();
        let rtn = RtnBasis::new(&c, 2).unwrap();
        let v = |p: &Point| Point::new(1.0 + p.x - 2.0 * p.y, 0.5 * p.x + 3.0 * p.y);
        let coef = rtn.interpolate(v, 6).unwrap();
        for q in [Point::new(0.3, 0.3), Point::new(0.5, 0.2), c.centroid] {
            assert!((rtn.evaluate(&coef, &q) - v(&q)).norm() < 1e-11);
        }
    }

    #[test]
    fn divergence_and_normal_traces_have_reduced_degree() {
        let c = cell();
        for l in 1..=3 {
            let rtn = RtnBasis::new(&c, l).unwrap();
            let lower = ScalarBasis::new(c.entity(), Some(l - 1)).unwrap();
            for i in 0..rtn.dim() {
                let div = |p: &Point| rtn.basis().tabulate(p).divs[i];
                let proj = l2_project(&lower, c.entity(), div, 2 * l + 2).unwrap();
                let rule = quadrature_rule(c.entity(), 2 * l + 2).unwrap();
                let defect = rule.integrate(|p| (div(p) - lower.evaluate(&proj, p)).powi(2));
                assert!(defect < 1e-22, "div of basis {i} at order {l}: {defect}");
                for face in &c.faces {
                    let fb = ScalarBasis::new(face.entity(), Some(l - 1)).unwrap();
                    let vn = |p: &Point| rtn.basis().values(p)[i].dot(&face.normal);
                    let proj = l2_project(&fb, face.entity(), vn, 2 * l + 2).unwrap();
                    let rule = quadrature_rule(face.entity(), 2 * l + 2).unwrap();
                    let defect = rule.integrate(|p| (vn(p) - fb.evaluate(&proj, p)).powi(2));
                    assert!(defect < 1e-22, "normal trace of basis {i} at order {l}: {defect}");
                }
            }
        }
    }

    #[test]
    fn moments_of_the_interpolate_match() {
        let c = cell();
        let v = |p: &Point| Point::new((p.x + p.y).sin(), (p.x - p.y).cos());
        for l in 1..=3 {
            let rtn = RtnBasis::new(&c, l).unwrap();
            let coef = rtn.interpolate(v, 14).unwrap();
            let diff = |p: &Point| rtn.evaluate(&coef, p) - v(p);
            for face in &c.faces {
                let fb = ScalarBasis::new(face.entity(), Some(l - 1)).unwrap();
                let rule = quadrature_rule(face.entity(), 14).unwrap();
                for j in 0..fb.dim() {
                    let m = rule.integrate(|p| diff(p).dot(&face.normal) * fb.values(p)[j]);
                    assert!(m.abs() < 1e-13, "face moment {j}: {m}");
                }
            }
            if l >= 2 {
                let ib = ScalarBasis::new(c.entity(), Some(l - 2)).unwrap();
                let rule = quadrature_rule(c.entity(), 14).unwrap();
                for j in 0..ib.dim() {
                    let mx = rule.integrate(|p| diff(p).x * ib.values(p)[j]);
                    let my = rule.integrate(|p| diff(p).y * ib.values(p)[j]);
                    assert!(mx.abs() < 1e-13 && my.abs() < 1e-13);
                }
            }
        }
    }
}
