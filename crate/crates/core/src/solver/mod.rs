//! Global assembly of the coupled discrete problem, Crank–Nicolson time
//! stepping with Newton linearization, and linear solves with optional
//! static condensation.

mod assembly;
mod linear;
mod newton;

pub use assembly::{assemble_jacobian, assemble_residual, StepData};
pub use linear::{static_condense_solve, CondensationStats, SparseMatrix};
pub use newton::{newton_solve, run_simulation, NewtonReport, Trajectory};

use nalgebra::DVector;

use crate::hybrid::{HybridScalarField, HybridSpace, HybridVectorField};
use crate::polyspace::quadrature_rule;
use crate::{Error, Point, Result};

/// Linear solver used inside Newton iterations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearSolver {
    Direct,
    Condensed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub k: usize,
    pub nu: f64,
    pub mu: f64,
    pub final_time: f64,
    pub c_stab: f64,
    pub newton_rtol: f64,
    /// Residual norm below which Newton stops regardless of the initial residual.
    pub newton_atol: f64,
    pub newton_max_iter: usize,
    pub linear_solver: LinearSolver,
    /// Includes the convective trilinear terms; disabling them leaves a
    /// linear problem.
    pub convection: bool,
    /// Overrides the step-count rule when set.
    pub num_steps: Option<usize>,
    /// Solves every Newton system both directly and condensed and records
    /// the largest relative discrepancy.
    pub cross_check: bool,
    /// Relative tolerance of the divergence check on accepted states.
    pub divergence_tol: f64,
}

impl SolverConfig {
    pub fn new(k: usize, nu: f64, mu: f64) -> Self {
        Self {
            k,
            nu,
            mu,
            final_time: 1.0,
            c_stab: 1.0,
            newton_rtol: 1e-8,
            newton_atol: 1e-12,
            newton_max_iter: 25,
            linear_solver: LinearSolver::Condensed,
            convection: true,
            num_steps: None,
            cross_check: false,
            divergence_tol: 1e-10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !positive(self.nu) || !positive(self.mu) {
            return Err(Error::Config("nu and mu must be positive".into()));
        }
        if !positive(self.final_time) {
            return Err(Error::Config("final time must be positive".into()));
        }
        if !(self.c_stab >= 0.0 && self.c_stab.is_finite()) {
            return Err(Error::Config("C_stab must be nonnegative".into()));
        }
        if !(self.newton_rtol > 0.0 && self.newton_rtol < 1.0) {
            return Err(Error::Config("newton_rtol must lie in (0, 1)".into()));
        }
        if self.newton_max_iter == 0 {
            return Err(Error::Config("newton_max_iter must be positive".into()));
        }
        if self.num_steps == Some(0) {
            return Err(Error::Config("number of steps must be positive".into()));
        }
        Ok(())
    }
}

/// Forcing terms and Dirichlet data of the velocity and magnetic field.
pub trait ProblemData {
    fn f(&self, t: f64, p: &Point) -> Point;
    fn g(&self, t: f64, p: &Point) -> Point;
    fn u_boundary(&self, _t: f64, _p: &Point) -> Point {
        Point::zeros()
    }
    fn b_boundary(&self, _t: f64, _p: &Point) -> Point {
        Point::zeros()
    }
}

/// No forcing, homogeneous boundary data.
#[derive(Debug, Clone, Copy, Default)]
pub struct Unforced;

impl ProblemData for Unforced {
    fn f(&self, _t: f64, _p: &Point) -> Point {
        Point::zeros()
    }
    fn g(&self, _t: f64, _p: &Point) -> Point {
        Point::zeros()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationState {
    pub step: usize,
    pub time: f64,
    pub u: HybridVectorField,
    pub b: HybridVectorField,
    pub p: HybridScalarField,
    pub r: HybridScalarField,
    /// Upwind coefficients used to reach this state.
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
}

/// `N = max(10, ceil(h^{-(k+1)/2}))`.
pub fn time_step_count(h: f64, k: usize) -> usize {
    let x = h.powf(-((k + 1) as f64) / 2.0);
    // absorb round-off in exact powers such as 0.01^{-1} = 100
    let n = (x * (1.0 - 1e-12)).ceil() as usize;
    n.max(10)
}

/// `C_stab max(1e-4, ‖u_T‖_{L∞(T)} + ‖b_T‖_{L∞(T)})` on every element, from
/// the state at the beginning of the step.
pub fn upwind_coefficients(space: &HybridSpace, u: &HybridVectorField, b: &HybridVectorField, c_stab: f64) -> Vec<f64> {
    (0..space.num_elements())
        .map(|e| c_stab * (element_sup(space, u, e) + element_sup(space, b, e)).max(1e-4))
        .collect()
}

/// Sampled `‖v_T‖_{L∞(T)}`.
pub fn element_sup(space: &HybridSpace, v: &HybridVectorField, e: usize) -> f64 {
    let l = space.local(e);
    let rule = quadrature_rule(l.cell.entity(), crate::polyspace::default_quadrature_degree(space.degree()))
        .expect("supported degree");
    let block = v.element_block(e).into_owned();
    rule.points
        .iter()
        .chain(l.cell.vertices.iter())
        .map(|p| l.rtn.evaluate(&block, p).norm())
        .fold(0.0, f64::max)
}

/// Position of every unknown in the global vector:
/// `[u_T | b_T | p_T | r_T | u_F | b_F | p_F | r_F | λ_p, λ_r]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofLayout {
    pub num_elements: usize,
    pub num_faces: usize,
    pub rtn: usize,
    pub element_scalar: usize,
    pub face_vector: usize,
    pub face_scalar: usize,
    pub u_elements: usize,
    pub b_elements: usize,
    pub p_elements: usize,
    pub r_elements: usize,
    pub u_faces: usize,
    pub b_faces: usize,
    pub p_faces: usize,
    pub r_faces: usize,
    pub lambda_p: usize,
    pub lambda_r: usize,
    pub total: usize,
}

impl DofLayout {
    pub fn new(space: &HybridSpace) -> Self {
        let s = space.sizes();
        let (ne, nf) = (space.num_elements(), space.num_faces());
        let u_elements = 0;
        let b_elements = ne * s.rtn;
        let p_elements = 2 * ne * s.rtn;
        let r_elements = p_elements + ne * s.element_scalar;
        let u_faces = r_elements + ne * s.element_scalar;
        let b_faces = u_faces + nf * s.face_vector;
        let p_faces = b_faces + nf * s.face_vector;
        let r_faces = p_faces + nf * s.face_scalar;
        let lambda_p = r_faces + nf * s.face_scalar;
        Self {
            num_elements: ne,
            num_faces: nf,
            rtn: s.rtn,
            element_scalar: s.element_scalar,
            face_vector: s.face_vector,
            face_scalar: s.face_scalar,
            u_elements,
            b_elements,
            p_elements,
            r_elements,
            u_faces,
            b_faces,
            p_faces,
            r_faces,
            lambda_p,
            lambda_r: lambda_p + 1,
            total: lambda_p + 2,
        }
    }

    /// Global indices of the local vector unknowns of element `e`; `field` 0 is u, 1 is b.
    pub fn vector_dofs(&self, space: &HybridSpace, field: usize, e: usize) -> Vec<usize> {
        let (el, fa) = if field == 0 { (self.u_elements, self.u_faces) } else { (self.b_elements, self.b_faces) };
        let split = self.num_elements * self.rtn;
        space
            .vector_dofs(e)
            .into_iter()
            .map(|i| if i < split { el + i } else { fa + i - split })
            .collect()
    }

    /// Global indices of the local scalar unknowns of element `e`; `field` 0 is p, 1 is r.
    pub fn scalar_dofs(&self, space: &HybridSpace, field: usize, e: usize) -> Vec<usize> {
        let (el, fa) = if field == 0 { (self.p_elements, self.p_faces) } else { (self.r_elements, self.r_faces) };
        let split = self.num_elements * self.element_scalar;
        space
            .scalar_dofs(e)
            .into_iter()
            .map(|i| if i < split { el + i } else { fa + i - split })
            .collect()
    }

    /// Face unknowns of face `f` for vector field `field`.
    pub fn vector_face_dofs(&self, field: usize, f: usize) -> std::ops::Range<usize> {
        let start = if field == 0 { self.u_faces } else { self.b_faces } + f * self.face_vector;
        start..start + self.face_vector
    }

    /// Element-interior unknowns of `e`: its u, b, p and r element blocks.
    pub fn interior_block(&self, e: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(2 * self.rtn + 2 * self.element_scalar);
        for start in [self.u_elements, self.b_elements] {
            out.extend(start + e * self.rtn..start + (e + 1) * self.rtn);
        }
        for start in [self.p_elements, self.r_elements] {
            out.extend(start + e * self.element_scalar..start + (e + 1) * self.element_scalar);
        }
        out
    }

    /// Size of the face-plus-multiplier system left by static condensation.
    pub fn condensed_dim(&self) -> usize {
        self.total - self.u_faces
    }

    pub fn pack(
        &self,
        u: &HybridVectorField,
        b: &HybridVectorField,
        p: &HybridScalarField,
        r: &HybridScalarField,
        lambda: [f64; 2],
    ) -> DVector<f64> {
        let mut x = DVector::zeros(self.total);
        let put = |x: &mut DVector<f64>, start: usize, v: nalgebra::DVectorView<f64>| {
            x.rows_mut(start, v.len()).copy_from(&v);
        };
        put(&mut x, self.u_elements, u.element_part());
        put(&mut x, self.b_elements, b.element_part());
        put(&mut x, self.p_elements, p.element_part());
        put(&mut x, self.r_elements, r.element_part());
        put(&mut x, self.u_faces, u.face_part());
        put(&mut x, self.b_faces, b.face_part());
        put(&mut x, self.p_faces, p.face_part());
        put(&mut x, self.r_faces, r.face_part());
        x[self.lambda_p] = lambda[0];
        x[self.lambda_r] = lambda[1];
        x
    }

    /// Splits a global vector into `(u, b, p, r)`.
    pub fn unpack(
        &self,
        space: &HybridSpace,
        x: &DVector<f64>,
        homogeneous_bc: bool,
    ) -> Result<(HybridVectorField, HybridVectorField, HybridScalarField, HybridScalarField)> {
        if x.len() != self.total {
            return Err(Error::Mismatch(format!("global vector of length {} for {} unknowns", x.len(), self.total)));
        }
        let ne = self.num_elements;
        let nf = self.num_faces;
        let vector = |el: usize, fa: usize| {
            let mut v = DVector::zeros(ne * self.rtn + nf * self.face_vector);
            v.rows_mut(0, ne * self.rtn).copy_from(&x.rows(el, ne * self.rtn));
            v.rows_mut(ne * self.rtn, nf * self.face_vector).copy_from(&x.rows(fa, nf * self.face_vector));
            let mut field = HybridVectorField::zeros(space, false);
            *field.as_vector_mut() = v;
            if homogeneous_bc {
                field.apply_homogeneous_bc(space);
            }
            field
        };
        let scalar = |el: usize, fa: usize| {
            let mut v = DVector::zeros(ne * self.element_scalar + nf * self.face_scalar);
            v.rows_mut(0, ne * self.element_scalar).copy_from(&x.rows(el, ne * self.element_scalar));
            v.rows_mut(ne * self.element_scalar, nf * self.face_scalar)
                .copy_from(&x.rows(fa, nf * self.face_scalar));
            HybridScalarField::from_vector(space, v, true)
        };
        Ok((
            vector(self.u_elements, self.u_faces),
            vector(self.b_elements, self.b_faces),
            scalar(self.p_elements, self.p_faces)?,
            scalar(self.r_elements, self.r_faces)?,
        ))
    }
}
