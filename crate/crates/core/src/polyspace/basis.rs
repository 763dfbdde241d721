use nalgebra::{DMatrix, DVector};

use super::quadrature::{quadrature_rule, Entity, QuadratureRule};
use crate::{Error, Point, Result};

/// Number of bivariate monomials of total degree at most `degree`.
pub fn dim_poly2(degree: usize) -> usize {
    (degree + 1) * (degree + 2) / 2
}

/// Monomials `((x - c)/s)^a ((y - c)/s)^b` with `a + b <= degree`, ordered by
/// total degree.
#[derive(Debug, Clone)]
pub struct ScaledMonomials {
    degree: usize,
    center: Point,
    scale: f64,
    exponents: Vec<(i32, i32)>,
}

impl ScaledMonomials {
    pub fn new(degree: usize, center: Point, scale: f64) -> Self {
        let mut exponents = Vec::with_capacity(dim_poly2(degree));
        for total in 0..=degree as i32 {
            for b in 0..=total {
                exponents.push((total - b, b));
            }
        }
        Self {
            degree,
            center,
            scale,
            exponents,
        }
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn exponents(&self) -> &[(i32, i32)] {
        &self.exponents
    }

    /// Index of `xi^a eta^b`.
    pub fn index_of(&self, a: i32, b: i32) -> Option<usize> {
        self.exponents.iter().position(|&e| e == (a, b))
    }

    pub fn scaled(&self, p: &Point) -> (f64, f64) {
        ((p.x - self.center.x) / self.scale, (p.y - self.center.y) / self.scale)
    }

    pub fn values(&self, p: &Point) -> DVector<f64> {
        let (xi, eta) = self.scaled(p);
        DVector::from_iterator(
            self.len(),
            self.exponents.iter().map(|&(a, b)| xi.powi(a) * eta.powi(b)),
        )
    }

    /// Columns hold the x- and y-derivatives.
    pub fn gradients(&self, p: &Point) -> (DVector<f64>, DVector<f64>) {
        let (xi, eta) = self.scaled(p);
        let dx = self.exponents.iter().map(|&(a, b)| {
            if a == 0 {
                0.0
            } else {
                a as f64 * xi.powi(a - 1) * eta.powi(b) / self.scale
            }
        });
        let dy = self.exponents.iter().map(|&(a, b)| {
            if b == 0 {
                0.0
            } else {
                b as f64 * xi.powi(a) * eta.powi(b - 1) / self.scale
            }
        });
        (
            DVector::from_iterator(self.len(), dx),
            DVector::from_iterator(self.len(), dy),
        )
    }

    /// Monomial Gram matrix on a quadrature rule.
    pub fn mass(&self, quad: &QuadratureRule) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.len(), self.len());
        for (p, w) in quad.iter() {
            let v = self.values(p);
            m.ger(w, &v, &v, 1.0);
        }
        m
    }
}

/// Modified Gram–Schmidt (applied twice) on the rows of `span` with respect to
/// the inner product `gram`. Rows that become numerically dependent are an
/// error.
pub fn orthonormalize(span: &DMatrix<f64>, gram: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = span.nrows();
    let mut q = span.clone();
    let inner = |a: &DVector<f64>, b: &DVector<f64>| (gram * b).dot(a);
    for i in 0..n {
        let mut v: DVector<f64> = q.row(i).transpose();
        let original = inner(&v, &v).sqrt();
        for _pass in 0..2 {
            for j in 0..i {
                let qj: DVector<f64> = q.row(j).transpose();
                let c = inner(&v, &qj);
                v.axpy(-c, &qj, 1.0);
            }
        }
        let norm = inner(&v, &v).sqrt();
        if !(norm > 1e-10 * original) {
            return Err(Error::Singular {
                what: "basis Gram",
            });
        }
        q.set_row(i, &(v / norm).transpose());
    }
    Ok(q)
}

#[derive(Debug, Clone)]
enum ScalarKind {
    Empty,
    Element {
        monomials: ScaledMonomials,
        coef: DMatrix<f64>,
    },
    Face {
        start: Point,
        end: Point,
        length: f64,
    },
}

/// L2-orthonormal basis of `P^degree` on an element or a face.
#[derive(Debug, Clone)]
pub struct ScalarBasis {
    kind: ScalarKind,
    degree: Option<usize>,
    dim: usize,
}

impl ScalarBasis {
    /// Zero-dimensional basis standing for `P^{-1} = {0}`.
    pub fn empty() -> Self {
        Self {
            kind: ScalarKind::Empty,
            degree: None,
            dim: 0,
        }
    }

    /// `P^degree(entity)`, or the empty space when `degree` is `None`.
    pub fn new(entity: Entity, degree: Option<usize>) -> Result<Self> {
        let Some(degree) = degree else {
            return Ok(Self::empty());
        };
        match entity {
            Entity::Triangle(_) => {
                let monomials = ScaledMonomials::new(degree, entity.centroid(), entity.diameter());
                let quad = quadrature_rule(entity, 2 * degree)?;
                let gram = monomials.mass(&quad);
                let coef = orthonormalize(&DMatrix::identity(monomials.len(), monomials.len()), &gram)?;
                Ok(Self {
                    dim: monomials.len(),
                    kind: ScalarKind::Element { monomials, coef },
                    degree: Some(degree),
                })
            }
            Entity::Segment([start, end]) => Ok(Self {
                kind: ScalarKind::Face {
                    start,
                    end,
                    length: (end - start).norm(),
                },
                degree: Some(degree),
                dim: degree + 1,
            }),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> Option<usize> {
        self.degree
    }

    pub fn values(&self, p: &Point) -> DVector<f64> {
        match &self.kind {
            ScalarKind::Empty => DVector::zeros(0),
            ScalarKind::Element { monomials, coef } => coef * monomials.values(p),
            ScalarKind::Face { start, end, length } => {
                let t = end - start;
                let s = 2.0 * (p - start).dot(&t) / (length * length) - 1.0;
                let mut out = DVector::zeros(self.dim);
                let mut prev = 1.0;
                let mut cur = s;
                for i in 0..self.dim {
                    let li = match i {
                        0 => 1.0,
                        1 => s,
                        _ => {
                            let next = ((2 * i - 1) as f64 * s * cur - (i - 1) as f64 * prev) / i as f64;
                            prev = cur;
                            cur = next;
                            next
                        }
                    };
                    out[i] = li * ((2 * i + 1) as f64 / length).sqrt();
                }
                out
            }
        }
    }

    /// Gradients of the basis functions; only meaningful on elements.
    pub fn gradients(&self, p: &Point) -> Vec<Point> {
        match &self.kind {
            ScalarKind::Element { monomials, coef } => {
                let (dx, dy) = monomials.gradients(p);
                let gx = coef * dx;
                let gy = coef * dy;
                (0..self.dim).map(|i| Point::new(gx[i], gy[i])).collect()
            }
            ScalarKind::Empty => Vec::new(),
            ScalarKind::Face { .. } => panic!("face bases carry no in-plane gradient"),
        }
    }

    /// Coefficients of the basis over the scaled monomials (elements only).
    pub fn monomial_coefficients(&self) -> Option<(&ScaledMonomials, &DMatrix<f64>)> {
        match &self.kind {
            ScalarKind::Element { monomials, coef } => Some((monomials, coef)),
            _ => None,
        }
    }

    /// Evaluates the polynomial with coefficients `coef` at `p`.
    pub fn evaluate(&self, coef: &DVector<f64>, p: &Point) -> f64 {
        if self.dim == 0 {
            return 0.0;
        }
        self.values(p).dot(coef)
    }
}

/// Vector-valued polynomials expressed over scaled monomials; row `i` holds
/// the x-component coefficients followed by the y-component coefficients of
/// basis function `i`.
#[derive(Debug, Clone)]
pub struct VectorBasis {
    monomials: ScaledMonomials,
    coef: DMatrix<f64>,
}

/// Value, gradient and divergence of every function of a [`VectorBasis`] at a point.
#[derive(Debug, Clone)]
pub struct VectorTabulation {
    pub values: Vec<Point>,
    /// `grads[i][(c, d)]` is the d-derivative of component c.
    pub grads: Vec<nalgebra::Matrix2<f64>>,
    pub divs: Vec<f64>,
}

impl VectorBasis {
    pub fn new(monomials: ScaledMonomials, coef: DMatrix<f64>) -> Self {
        assert_eq!(coef.ncols(), 2 * monomials.len());
        Self { monomials, coef }
    }

    pub fn dim(&self) -> usize {
        self.coef.nrows()
    }

    pub fn monomials(&self) -> &ScaledMonomials {
        &self.monomials
    }

    pub fn coefficients(&self) -> &DMatrix<f64> {
        &self.coef
    }

    pub fn values(&self, p: &Point) -> Vec<Point> {
        let m = self.monomials.values(p);
        let nm = m.len();
        let vx = self.coef.columns(0, nm) * &m;
        let vy = self.coef.columns(nm, nm) * &m;
        (0..self.dim()).map(|i| Point::new(vx[i], vy[i])).collect()
    }

    pub fn tabulate(&self, p: &Point) -> VectorTabulation {
        let m = self.monomials.values(p);
        let (dx, dy) = self.monomials.gradients(p);
        let nm = m.len();
        let cx = self.coef.columns(0, nm);
        let cy = self.coef.columns(nm, nm);
        let (vx, vy) = (cx * &m, cy * &m);
        let (xx, xy) = (cx * &dx, cx * &dy);
        let (yx, yy) = (cy * &dx, cy * &dy);
        let n = self.dim();
        VectorTabulation {
            values: (0..n).map(|i| Point::new(vx[i], vy[i])).collect(),
            grads: (0..n)
                .map(|i| nalgebra::Matrix2::new(xx[i], xy[i], yx[i], yy[i]))
                .collect(),
            divs: (0..n).map(|i| xx[i] + yy[i]).collect(),
        }
    }

    /// Evaluates the field with coefficients `c` at `p`.
    pub fn evaluate(&self, c: &DVector<f64>, p: &Point) -> Point {
        self.values(p)
            .iter()
            .zip(c.iter())
            .fold(Point::zeros(), |acc, (v, ci)| acc + *ci * v)
    }
}
