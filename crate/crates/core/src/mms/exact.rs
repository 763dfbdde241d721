use std::f64::consts::PI;

use nalgebra::Matrix2;

use crate::solver::ProblemData;
use crate::Point;

/// Values and derivatives of the manufactured fields at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactValues {
    pub u: Point,
    pub b: Point,
    pub p: f64,
    pub r: f64,
    /// `grad_u[(c, d)] = ∂_d u_c`.
    pub grad_u: Matrix2<f64>,
    pub grad_b: Matrix2<f64>,
    pub grad_p: Point,
    pub grad_r: Point,
    pub laplacian_u: Point,
    pub laplacian_b: Point,
    pub dt_u: Point,
    pub dt_b: Point,
}

/// Manufactured solution on the unit square:
/// `u = -e^{-t/2}(sin 2πx sin 2πy, cos 2πx cos 2πy)`,
/// `b = -e^{-t/2}(cos 2πx cos 2πy, sin 2πx sin 2πy)`,
/// `p = e^{-t/2} sin 2πx cos 2πy`, `r = e^{-t/2} cos 2πx sin 2πy`.
pub fn exact_solution_2d(t: f64, x: f64, y: f64) -> ExactValues {
    let k = 2.0 * PI;
    let e = (-0.5 * t).exp();
    let (sa, ca) = (k * x).sin_cos();
    let (sb, cb) = (k * y).sin_cos();
    let u = -e * Point::new(sa * sb, ca * cb);
    let b = -e * Point::new(ca * cb, sa * sb);
    let grad_u = e * k * Matrix2::new(-ca * sb, -sa * cb, sa * cb, ca * sb);
    let grad_b = e * k * Matrix2::new(sa * cb, ca * sb, -ca * sb, -sa * cb);
    ExactValues {
        u,
        b,
        p: e * sa * cb,
        r: e * ca * sb,
        grad_u,
        grad_b,
        grad_p: e * k * Point::new(ca * cb, -sa * sb),
        grad_r: e * k * Point::new(-sa * sb, ca * cb),
        laplacian_u: -2.0 * k * k * u,
        laplacian_b: -2.0 * k * k * b,
        dt_u: -0.5 * u,
        dt_b: -0.5 * b,
    }
}

/// `f = ∂_t u - νΔu + (u·∇)u - (b·∇)b + ∇p` and
/// `g = ∂_t b - μΔb + (u·∇)b - (b·∇)u + ∇r` for the manufactured solution.
pub fn forcing_terms_2d(nu: f64, mu: f64, t: f64, x: f64, y: f64) -> (Point, Point) {
    let s = exact_solution_2d(t, x, y);
    let f = s.dt_u - nu * s.laplacian_u + s.grad_u * s.u - s.grad_b * s.b + s.grad_p;
    let g = s.dt_b - mu * s.laplacian_b + s.grad_b * s.u - s.grad_u * s.b + s.grad_r;
    (f, g)
}

/// The manufactured problem with Dirichlet data taken from the exact fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedProblem {
    pub nu: f64,
    pub mu: f64,
}

impl ManufacturedProblem {
    pub fn new(nu: f64, mu: f64) -> Self {
        Self { nu, mu }
    }

    pub fn u(&self, t: f64, p: &Point) -> Point {
        exact_solution_2d(t, p.x, p.y).u
    }

    pub fn b(&self, t: f64, p: &Point) -> Point {
        exact_solution_2d(t, p.x, p.y).b
    }
}

impl ProblemData for ManufacturedProblem {
    fn f(&self, t: f64, p: &Point) -> Point {
        forcing_terms_2d(self.nu, self.mu, t, p.x, p.y).0
    }
    fn g(&self, t: f64, p: &Point) -> Point {
        forcing_terms_2d(self.nu, self.mu, t, p.x, p.y).1
    }
    fn u_boundary(&self, t: f64, p: &Point) -> Point {
        self.u(t, p)
    }
    fn b_boundary(&self, t: f64, p: &Point) -> Point {
        self.b(t, p)
    }
}
