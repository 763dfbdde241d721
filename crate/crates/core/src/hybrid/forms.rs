use nalgebra::DVector;

use super::{HybridScalarField, HybridSpace, HybridVectorField};
use crate::polyspace::{default_quadrature_degree, quadrature_rule};
use crate::{Error, Point, Result};

fn check_vector(space: &HybridSpace, v: &HybridVectorField) -> Result<()> {
    let s = space.sizes();
    if v.degree() != s.k
        || v.num_elements() != space.num_elements()
        || v.len() != space.num_elements() * s.rtn + space.num_faces() * s.face_vector
    {
        return Err(Error::Mismatch("vector field does not belong to this space".into()));
    }
    Ok(())
}

fn check_scalar(space: &HybridSpace, q: &HybridScalarField) -> Result<()> {
    let s = space.sizes();
    if q.degree() != s.k
        || q.num_elements() != space.num_elements()
        || q.len() != space.num_elements() * s.element_scalar + space.num_faces() * s.face_scalar
    {
        return Err(Error::Mismatch("scalar field does not belong to this space".into()));
    }
    Ok(())
}

fn sum_local(
    space: &HybridSpace,
    fields: &[&HybridVectorField],
    f: impl Fn(usize, &[DVector<f64>]) -> f64,
) -> Result<f64> {
    for v in fields {
        check_vector(space, v)?;
    }
    let mut total = 0.0;
    for e in 0..space.num_elements() {
        let locals: Vec<_> = fields.iter().map(|v| space.local_vector(v, e)).collect();
        total += f(e, &locals);
    }
    Ok(total)
}

/// `(a, b)_{0,h} = Σ_T ∫_T a_T·b_T + h_T Σ_F ∫_F (a_F - a_T)·(b_F - b_T)`.
pub fn inner_product_0h(space: &HybridSpace, a: &HybridVectorField, b: &HybridVectorField) -> Result<f64> {
    sum_local(space, &[a, b], |e, l| l[0].dot(&(&space.local(e).mass0 * &l[1])))
}

pub fn norm_0h(space: &HybridSpace, v: &HybridVectorField) -> Result<f64> {
    Ok(inner_product_0h(space, v, v)?.max(0.0).sqrt())
}

/// `‖v‖_{1,h}`: broken gradient plus scaled face jumps.
pub fn norm_1h(space: &HybridSpace, v: &HybridVectorField) -> Result<f64> {
    sum_local(space, &[v], |e, l| local_norm_1_squared(space, e, &l[0])).map(f64::sqrt)
}

/// `‖v‖_{1,T}^2` from pointwise gradients and jumps, which keeps the
/// value accurate when `v` is close to a constant.
pub fn local_norm_1_squared(space: &HybridSpace, e: usize, local: &DVector<f64>) -> f64 {
    let l = space.local(e);
    let degree = super::local_quadrature_degree(space.degree());
    let vt = local.rows(0, l.sizes.rtn);
    let rule = quadrature_rule(l.cell.entity(), degree).expect("supported degree");
    let mut grad = 0.0;
    for (p, w) in rule.iter() {
        let tab = l.rtn.basis().tabulate(p);
        let g = tab.grads.iter().zip(vt.iter()).fold(nalgebra::Matrix2::zeros(), |acc, (g, c)| acc + *c * g);
        grad += w * g.norm_squared();
    }
    let mut jump = 0.0;
    for i in 0..3 {
        let rule = quadrature_rule(l.cell.faces[i].entity(), degree).expect("supported degree");
        for (p, w) in rule.iter() {
            jump += w * (l.face_difference(i, p) * local).norm_squared();
        }
    }
    grad + jump / l.cell.diameter
}

fn element_samples(space: &HybridSpace, e: usize) -> Vec<Point> {
    let l = space.local(e);
    let rule = quadrature_rule(l.cell.entity(), default_quadrature_degree(space.degree())).expect("supported degree");
    let mut pts: Vec<Point> = rule.points.clone();
    pts.extend(l.cell.vertices);
    for face in &l.cell.faces {
        pts.push(0.5 * (face.start + face.end));
    }
    pts
}

fn face_samples(space: &HybridSpace, e: usize, i: usize) -> Vec<Point> {
    let face = &space.local(e).cell.faces[i];
    let rule = quadrature_rule(face.entity(), default_quadrature_degree(space.degree())).expect("supported degree");
    let mut pts: Vec<Point> = rule.points.clone();
    pts.extend([face.start, face.end, 0.5 * (face.start + face.end)]);
    pts
}

/// `‖v‖_{1,∞,h} = max_T (‖∇v_T‖_{L∞(T)} + h_T^{-1} max_F ‖v_F - v_T‖_{L∞(F)})`,
/// with suprema estimated on quadrature points, vertices and face midpoints.
pub fn norm_1infty_h(space: &HybridSpace, v: &HybridVectorField) -> Result<f64> {
    check_vector(space, v)?;
    let mut out: f64 = 0.0;
    for e in 0..space.num_elements() {
        let l = space.local(e);
        let local = space.local_vector(v, e);
        let vt = local.rows(0, l.sizes.rtn);
        let mut grad_sup: f64 = 0.0;
        for p in element_samples(space, e) {
            let tab = l.rtn.basis().tabulate(&p);
            let g = tab.grads.iter().zip(vt.iter()).fold(nalgebra::Matrix2::zeros(), |acc, (g, c)| acc + *c * g);
            grad_sup = grad_sup.max(g.norm());
        }
        let mut jump_sup: f64 = 0.0;
        for i in 0..3 {
            for p in face_samples(space, e, i) {
                jump_sup = jump_sup.max((l.face_difference(i, &p) * &local).norm());
            }
        }
        out = out.max(grad_sup + jump_sup / l.cell.diameter);
    }
    Ok(out)
}

/// `B_h(v, q) = Σ_T ∫_T v_T · G_T q`.
pub fn divergence_coupling(space: &HybridSpace, v: &HybridVectorField, q: &HybridScalarField) -> Result<f64> {
    check_vector(space, v)?;
    check_scalar(space, q)?;
    let mut total = 0.0;
    for e in 0..space.num_elements() {
        let ql = space.local_scalar(q, e);
        total += v.element_block(e).dot(&(&space.local(e).coupling * ql));
    }
    Ok(total)
}

/// `t_h(w, v, z)`.
pub fn trilinear_form(
    space: &HybridSpace,
    w: &HybridVectorField,
    v: &HybridVectorField,
    z: &HybridVectorField,
) -> Result<f64> {
    sum_local(space, &[w, v, z], |e, l| {
        let m = space.local(e).convection_matrix(&l[0].as_slice()[..space.sizes().rtn]);
        l[1].dot(&(m * &l[2]))
    })
}

/// `j_{α,h}(w, v) = Σ_T α_T Σ_F ∫_F (w_F - w_T)·(v_F - v_T)`.
pub fn upwind_form(space: &HybridSpace, alpha: &[f64], w: &HybridVectorField, v: &HybridVectorField) -> Result<f64> {
    if alpha.len() != space.num_elements() {
        return Err(Error::Mismatch(format!(
            "{} upwind coefficients for {} elements",
            alpha.len(),
            space.num_elements()
        )));
    }
    sum_local(space, &[w, v], |e, l| alpha[e] * l[0].dot(&(&space.local(e).jump * &l[1])))
}

/// `|v|_{α,h} = j_{α,h}(v, v)^{1/2}`.
pub fn upwind_seminorm(space: &HybridSpace, alpha: &[f64], v: &HybridVectorField) -> Result<f64> {
    Ok(upwind_form(space, alpha, v, v)?.max(0.0).sqrt())
}

/// Sampled suprema of the quantities that vanish for discretely solenoidal fields.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DivergenceReport {
    /// `max_T ‖∇·v_T‖_{L∞(T)}`.
    pub max_divergence: f64,
    /// `max_F ‖v_{T1}·n_{T1F} + v_{T2}·n_{T2F}‖_{L∞(F)}` over interior faces.
    pub max_normal_jump: f64,
    /// `max_F ‖(v_T - v_F)·n_{TF}‖_{L∞(F)}` over boundary faces; equals the
    /// normal trace of `v_T` when the boundary face values vanish.
    pub max_boundary_normal: f64,
    /// `max_T ‖v_T - π^k_T v_T‖_{L∞(T)}`.
    pub max_complement: f64,
    /// Largest sampled value of the element and face components, the reference magnitude.
    pub scale: f64,
}

impl DivergenceReport {
    /// Largest metric divided by the field magnitude (or by 1 for a zero field).
    pub fn max_relative(&self) -> f64 {
        let m = self
            .max_divergence
            .max(self.max_normal_jump)
            .max(self.max_boundary_normal)
            .max(self.max_complement);
        m / if self.scale > 0.0 { self.scale } else { 1.0 }
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_relative() <= tol
    }
}

/// Evaluates the pointwise conditions characterising discretely divergence-free fields.
pub fn check_divergence_free(space: &HybridSpace, v: &HybridVectorField) -> Result<DivergenceReport> {
    check_vector(space, v)?;
    let mesh = space.mesh();
    let s = space.sizes();
    let mut report = DivergenceReport::default();
    for e in 0..space.num_elements() {
        let l = space.local(e);
        let vt = v.element_block(e).into_owned();
        let samples = element_samples(space, e);

        // L2 projection onto P^k(T)^2 with an exact rule
        let rule = quadrature_rule(l.cell.entity(), 2 * s.k + 2)?;
        let ne = s.element_scalar;
        let mut px = DVector::zeros(ne);
        let mut py = DVector::zeros(ne);
        for (p, w) in rule.iter() {
            let val = l.rtn.evaluate(&vt, p);
            let psi = l.scalar.values(p);
            px.axpy(w * val.x, &psi, 1.0);
            py.axpy(w * val.y, &psi, 1.0);
        }
        for p in &samples {
            let tab = l.rtn.basis().tabulate(p);
            let mut val = Point::zeros();
            let mut div = 0.0;
            for (a, c) in vt.iter().enumerate() {
                val += *c * tab.values[a];
                div += *c * tab.divs[a];
            }
            report.scale = report.scale.max(val.norm());
            report.max_divergence = report.max_divergence.max(div.abs());
            let psi = l.scalar.values(p);
            let proj = Point::new(psi.dot(&px), psi.dot(&py));
            report.max_complement = report.max_complement.max((val - proj).norm());
        }
        for (i, ef) in mesh.element_faces(e).iter().enumerate() {
            let normal = l.cell.faces[i].normal;
            let (first, second) = mesh.face_elements(ef.face);
            match second {
                None => {
                    for p in face_samples(space, e, i) {
                        let face = space.face_value(v, ef.face, &p);
                        report.scale = report.scale.max(face.norm());
                        let jump = space.element_value(v, e, &p) - face;
                        report.max_boundary_normal = report.max_boundary_normal.max(jump.dot(&normal).abs());
                    }
                }
                Some(other) if first == e => {
                    for p in face_samples(space, e, i) {
                        report.scale = report.scale.max(space.face_value(v, ef.face, &p).norm());
                        let jump = space.element_value(v, e, &p) - space.element_value(v, other, &p);
                        report.max_normal_jump = report.max_normal_jump.max(jump.dot(&normal).abs());
                    }
                }
                Some(_) => {}
            }
        }
    }
    Ok(report)
}
