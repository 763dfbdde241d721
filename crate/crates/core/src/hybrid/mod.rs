//! Hybrid discrete spaces, interpolators, discrete norms and local forms.
//!
//! Vector unknowns carry an `RTN^{k+1}(T)` block per element and a
//! `P^k(F)^2` block per face; scalar unknowns carry `P^k(T)` and `P^k(F)`
//! blocks. Face blocks store the x-coefficients followed by the
//! y-coefficients over the face basis.

mod fields;
mod forms;
mod local;

pub use fields::{HybridScalarField, HybridVectorField};
pub use forms::{
    check_divergence_free, divergence_coupling, inner_product_0h, local_norm_1_squared, norm_0h, norm_1h, norm_1infty_h,
    trilinear_form, upwind_form, upwind_seminorm, DivergenceReport,
};
pub use local::{local_quadrature_degree, LocalOperatorSet, LocalSizes};

use nalgebra::DVector;

use crate::mesh::{compute_geometry, Geometry, Mesh};
use crate::polyspace::{l2_project, Cell, Entity, ScalarBasis, MAX_QUADRATURE_DEGREE};
use crate::{Point, Result};

/// Quadrature degree used to interpolate non-polynomial data.
pub const INTERPOLATION_DEGREE: usize = MAX_QUADRATURE_DEGREE;

/// A mesh together with every local operator of the degree-`k` scheme.
#[derive(Debug, Clone)]
pub struct HybridSpace {
    mesh: Mesh,
    geometry: Geometry,
    sizes: LocalSizes,
    locals: Vec<LocalOperatorSet>,
    face_bases: Vec<ScalarBasis>,
}

impl HybridSpace {
    pub fn new(mesh: &Mesh, k: usize) -> Result<Self> {
        let geometry = compute_geometry(mesh)?;
        let locals = (0..mesh.num_elements())
            .map(|e| LocalOperatorSet::new(Cell::from_mesh(mesh, &geometry, e), k))
            .collect::<Result<Vec<_>>>()?;
        let face_bases = (0..mesh.num_faces())
            .map(|f| {
                let g = geometry.face(f);
                ScalarBasis::new(Entity::Segment([g.start, g.end]), Some(k))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            mesh: mesh.clone(),
            geometry,
            sizes: LocalSizes::new(k),
            locals,
            face_bases,
        })
    }

    pub fn degree(&self) -> usize {
        self.sizes.k
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn sizes(&self) -> LocalSizes {
        self.sizes
    }

    pub fn local(&self, e: usize) -> &LocalOperatorSet {
        &self.locals[e]
    }

    pub fn locals(&self) -> &[LocalOperatorSet] {
        &self.locals
    }

    pub fn face_basis(&self, f: usize) -> &ScalarBasis {
        &self.face_bases[f]
    }

    pub fn num_elements(&self) -> usize {
        self.mesh.num_elements()
    }

    pub fn num_faces(&self) -> usize {
        self.mesh.num_faces()
    }

    /// Gathers the local unknowns of element `e` from a vector field.
    pub fn local_vector(&self, v: &HybridVectorField, e: usize) -> DVector<f64> {
        let s = self.sizes;
        let mut out = DVector::zeros(s.vector());
        out.rows_mut(0, s.rtn).copy_from(&v.element_block(e));
        for (i, ef) in self.mesh.element_faces(e).iter().enumerate() {
            out.rows_mut(s.face_vector_offset(i), s.face_vector)
                .copy_from(&v.face_block(ef.face));
        }
        out
    }

    /// Gathers the local unknowns of element `e` from a scalar field.
    pub fn local_scalar(&self, q: &HybridScalarField, e: usize) -> DVector<f64> {
        let s = self.sizes;
        let mut out = DVector::zeros(s.scalar());
        out.rows_mut(0, s.element_scalar).copy_from(&q.element_block(e));
        for (i, ef) in self.mesh.element_faces(e).iter().enumerate() {
            out.rows_mut(s.face_scalar_offset(i), s.face_scalar)
                .copy_from(&q.face_block(ef.face));
        }
        out
    }

    /// Global indices, within a flat vector field, of the local unknowns of `e`.
    pub fn vector_dofs(&self, e: usize) -> Vec<usize> {
        let s = self.sizes;
        let face_start = self.num_elements() * s.rtn;
        let mut dofs: Vec<usize> = (e * s.rtn..(e + 1) * s.rtn).collect();
        for ef in self.mesh.element_faces(e) {
            let off = face_start + ef.face * s.face_vector;
            dofs.extend(off..off + s.face_vector);
        }
        dofs
    }

    /// Global indices, within a flat scalar field, of the local unknowns of `e`.
    pub fn scalar_dofs(&self, e: usize) -> Vec<usize> {
        let s = self.sizes;
        let face_start = self.num_elements() * s.element_scalar;
        let mut dofs: Vec<usize> = (e * s.element_scalar..(e + 1) * s.element_scalar).collect();
        for ef in self.mesh.element_faces(e) {
            let off = face_start + ef.face * s.face_scalar;
            dofs.extend(off..off + s.face_scalar);
        }
        dofs
    }

    /// Value of the element component `v_T` at `p ∈ T`.
    pub fn element_value(&self, v: &HybridVectorField, e: usize, p: &Point) -> Point {
        self.locals[e].rtn.evaluate(&v.element_block(e).into_owned(), p)
    }

    /// Value of the face component `v_F` at `p ∈ F`.
    pub fn face_value(&self, v: &HybridVectorField, f: usize, p: &Point) -> Point {
        let n = self.sizes.face_scalar;
        let phi = self.face_bases[f].values(p);
        let block = v.face_block(f);
        Point::new(phi.dot(&block.rows(0, n)), phi.dot(&block.rows(n, n)))
    }

    /// Interpolates a vector field: RTN interpolation on elements and L2
    /// projection on faces. With `homogeneous_bc` the boundary face blocks
    /// are set to zero.
    pub fn interpolate_velocity(
        &self,
        v: impl Fn(&Point) -> Point,
        homogeneous_bc: bool,
    ) -> Result<HybridVectorField> {
        let mut out = HybridVectorField::zeros(self, homogeneous_bc);
        for e in 0..self.num_elements() {
            let c = self.locals[e].rtn.interpolate(&v, INTERPOLATION_DEGREE)?;
            out.element_block_mut(e).copy_from(&c);
        }
        for f in 0..self.num_faces() {
            if homogeneous_bc && self.mesh.is_boundary(f) {
                continue;
            }
            let c = self.project_face_vector(f, &v)?;
            out.face_block_mut(f).copy_from(&c);
        }
        Ok(out)
    }

    /// `π^k_F` of a vector field on face `f`.
    pub fn project_face_vector(&self, f: usize, v: impl Fn(&Point) -> Point) -> Result<DVector<f64>> {
        let g = self.geometry.face(f);
        crate::polyspace::l2_project_vector(
            &self.face_bases[f],
            Entity::Segment([g.start, g.end]),
            v,
            INTERPOLATION_DEGREE,
        )
    }

    /// Interpolates a scalar by L2 projections on elements and faces. With
    /// `zero_mean` the global mean of the element part is subtracted from
    /// every block, which leaves the discrete gradient unchanged.
    pub fn interpolate_pressure(&self, q: impl Fn(&Point) -> f64, zero_mean: bool) -> Result<HybridScalarField> {
        let mut out = HybridScalarField::zeros(self, zero_mean);
        for e in 0..self.num_elements() {
            let l = &self.locals[e];
            let c = l2_project(&l.scalar, l.cell.entity(), &q, INTERPOLATION_DEGREE)?;
            out.element_block_mut(e).copy_from(&c);
        }
        for f in 0..self.num_faces() {
            let g = self.geometry.face(f);
            let c = l2_project(&self.face_bases[f], Entity::Segment([g.start, g.end]), &q, INTERPOLATION_DEGREE)?;
            out.face_block_mut(f).copy_from(&c);
        }
        if zero_mean {
            let mean = self.scalar_integral(&out) / self.total_area();
            self.shift_scalar(&mut out, -mean)?;
        }
        Ok(out)
    }

    pub fn total_area(&self) -> f64 {
        self.geometry.elements.iter().map(|g| g.area).sum()
    }

    /// Weights `w` with `Σ_T ∫_T q_T = w · (element part of q)`.
    pub fn element_scalar_integrals(&self, e: usize) -> DVector<f64> {
        let l = &self.locals[e];
        let rule = crate::polyspace::quadrature_rule(l.cell.entity(), self.sizes.k).expect("low degree");
        let mut out = DVector::zeros(self.sizes.element_scalar);
        for (p, w) in rule.iter() {
            out.axpy(w, &l.scalar.values(p), 1.0);
        }
        out
    }

    /// `Σ_T ∫_T q_T`.
    pub fn scalar_integral(&self, q: &HybridScalarField) -> f64 {
        (0..self.num_elements())
            .map(|e| self.element_scalar_integrals(e).dot(&q.element_block(e)))
            .sum()
    }

    /// Adds the constant `c` to every element and face block of `q`.
    pub fn shift_scalar(&self, q: &mut HybridScalarField, c: f64) -> Result<()> {
        for e in 0..self.num_elements() {
            let l = &self.locals[e];
            let d = l2_project(&l.scalar, l.cell.entity(), |_| c, 0)?;
            let mut block = q.element_block_mut(e);
            block += d;
        }
        for f in 0..self.num_faces() {
            let g = self.geometry.face(f);
            let d = l2_project(&self.face_bases[f], Entity::Segment([g.start, g.end]), |_| c, 0)?;
            let mut block = q.face_block_mut(f);
            block += d;
        }
        Ok(())
    }
}
