use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

use crate::{Error, Point, Result};

/// Highest polynomial degree a quadrature rule can be requested for.
pub const MAX_QUADRATURE_DEGREE: usize = 14;

/// A mesh entity on which polynomials, quadratures and projectors live.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Entity {
    Triangle([Point; 3]),
    Segment([Point; 2]),
}

impl Entity {
    pub fn measure(&self) -> f64 {
        match self {
            Entity::Triangle([a, b, c]) => {
                0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y)).abs()
            }
            Entity::Segment([a, b]) => (b - a).norm(),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Entity::Triangle([a, b, c]) => (b - a).norm().max((c - b).norm()).max((a - c).norm()),
            Entity::Segment([a, b]) => (b - a).norm(),
        }
    }

    pub fn centroid(&self) -> Point {
        match self {
            Entity::Triangle([a, b, c]) => (a + b + c) / 3.0,
            Entity::Segment([a, b]) => 0.5 * (a + b),
        }
    }
}

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Point, f64)> + '_ {
        self.points.iter().zip(self.weights.iter().copied())
    }

    pub fn integrate(&self, f: impl Fn(&Point) -> f64) -> f64 {
        self.iter().map(|(p, w)| w * f(p)).sum()
    }
}

fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(NonZeroUsize::new(n).expect("at least one node"));
    rule.as_node_weight_pairs().to_vec()
}

/// Quadrature rule exact for polynomials of total degree `degree` on `entity`.
///
/// Triangles use a collapsed (Duffy) tensor product of Gauss–Legendre rules,
/// so all weights are positive.
pub fn quadrature_rule(entity: Entity, degree: usize) -> Result<QuadratureRule> {
    if degree > MAX_QUADRATURE_DEGREE {
        return Err(Error::UnsupportedQuadrature {
            requested: degree,
            max: MAX_QUADRATURE_DEGREE,
        });
    }
    match entity {
        Entity::Segment([a, b]) => {
            let n = degree / 2 + 1;
            let len = (b - a).norm();
            let (points, weights) = gauss_legendre(n)
                .into_iter()
                .map(|(s, w)| (a + 0.5 * (s + 1.0) * (b - a), 0.5 * w * len))
                .unzip();
            Ok(QuadratureRule {
                points,
                weights,
                degree: 2 * n - 1,
            })
        }
        Entity::Triangle([a, b, c]) => {
            // the collapsed direction carries one extra degree from the Jacobian
            let n = (degree + 3) / 2;
            let twice_area = entity.measure() * 2.0;
            let gl = gauss_legendre(n);
            let mut points = Vec::with_capacity(n * n);
            let mut weights = Vec::with_capacity(n * n);
            for &(s, ws) in &gl {
                let xi = 0.5 * (s + 1.0);
                for &(t, wt) in &gl {
                    let eta = 0.5 * (t + 1.0);
                    let xr = xi * (1.0 - eta);
                    let yr = eta;
                    points.push(a + xr * (b - a) + yr * (c - a));
                    weights.push(0.25 * ws * wt * (1.0 - eta) * twice_area);
                }
            }
            Ok(QuadratureRule {
                points,
                weights,
                degree: 2 * n - 2,
            })
        }
    }
}
