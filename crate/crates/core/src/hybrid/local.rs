use nalgebra::{DMatrix, DVector, Matrix2xX};

use crate::polyspace::{dim_poly2, quadrature_rule, Cell, RtnBasis, ScalarBasis};
use crate::{Error, Point, Result};

/// Quadrature degree that integrates every polynomial integrand of the local
/// operators exactly.
pub fn local_quadrature_degree(k: usize) -> usize {
    (3 * k + 3).max(2 * k + 4)
}

/// Local sizes of the hybrid spaces on one triangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalSizes {
    pub k: usize,
    /// `dim RTN^{k+1}(T)`.
    pub rtn: usize,
    /// `dim P^k(F)^2`.
    pub face_vector: usize,
    /// `dim P^k(T)`.
    pub element_scalar: usize,
    /// `dim P^k(F)`.
    pub face_scalar: usize,
}

impl LocalSizes {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            rtn: (k + 1) * (k + 3),
            face_vector: 2 * (k + 1),
            element_scalar: dim_poly2(k),
            face_scalar: k + 1,
        }
    }

    /// Local vector unknowns: element block then the three face blocks.
    pub fn vector(&self) -> usize {
        self.rtn + 3 * self.face_vector
    }

    pub fn scalar(&self) -> usize {
        self.element_scalar + 3 * self.face_scalar
    }

    pub fn face_vector_offset(&self, i: usize) -> usize {
        self.rtn + i * self.face_vector
    }

    pub fn face_scalar_offset(&self, i: usize) -> usize {
        self.element_scalar + i * self.face_scalar
    }
}

/// Per-element matrices of the discrete forms, all acting on local
/// coefficient vectors laid out as described by [`LocalSizes`].
#[derive(Debug, Clone)]
pub struct LocalOperatorSet {
    pub sizes: LocalSizes,
    pub cell: Cell,
    pub rtn: RtnBasis,
    /// Orthonormal basis of `P^k(T)`.
    pub scalar: ScalarBasis,
    /// Orthonormal bases of `P^k(F)` built on the canonical face endpoints.
    pub faces: [ScalarBasis; 3],
    /// Orthonormal basis of `P^{k+1}(T)` used by the reconstruction.
    pub recon_basis: ScalarBasis,
    /// `λ_T = 3 h_T^2 / |T|`.
    pub lambda: f64,
    /// Coefficients of `p_T^{k+1}` over `recon_basis`: x-components then y-components.
    pub reconstruction: DMatrix<f64>,
    /// Consistent part of the diffusion form.
    pub consistency: DMatrix<f64>,
    pub stabilization: DMatrix<f64>,
    /// `a_T = consistency + stabilization`.
    pub diffusion: DMatrix<f64>,
    /// `∫_T φ_i · φ_j` over the RTN basis.
    pub rtn_mass: DMatrix<f64>,
    /// `Σ_F ∫_F (v_F - v_T)·(w_F - w_T)`.
    pub jump: DMatrix<f64>,
    /// Matrix of `(·,·)_{0,T}`.
    pub mass0: DMatrix<f64>,
    /// Matrix of `‖·‖_{1,T}^2`.
    pub norm1: DMatrix<f64>,
    /// `∫_T G_T q · φ_a`, i.e. the local matrix of `B_h`.
    pub coupling: DMatrix<f64>,
    /// RTN coefficients of `G_T q`.
    pub gradient: DMatrix<f64>,
    /// `trilinear[a][(i, j)] = t_T(φ_a, e_i, e_j)`, where `φ_a` is the
    /// a-th RTN function and `e_i` the i-th local vector unknown.
    pub trilinear: Vec<DMatrix<f64>>,
}

impl LocalOperatorSet {
    pub fn new(cell: Cell, k: usize) -> Result<Self> {
        let sizes = LocalSizes::new(k);
        let rtn = RtnBasis::new(&cell, k + 1)?;
        let scalar = ScalarBasis::new(cell.entity(), Some(k))?;
        let faces = [0, 1, 2].map(|i| ScalarBasis::new(cell.faces[i].entity(), Some(k)).expect("face basis"));
        let recon_basis = ScalarBasis::new(cell.entity(), Some(k + 1))?;
        let h = cell.diameter;
        let lambda = 3.0 * h * h / cell.area;
        let degree = local_quadrature_degree(k);
        let nu = sizes.vector();
        let nt = sizes.rtn;

        let mut ops = Self {
            sizes,
            cell,
            rtn,
            scalar,
            faces,
            recon_basis,
            lambda,
            reconstruction: DMatrix::zeros(0, 0),
            consistency: DMatrix::zeros(0, 0),
            stabilization: DMatrix::zeros(0, 0),
            diffusion: DMatrix::zeros(0, 0),
            rtn_mass: DMatrix::zeros(nt, nt),
            jump: DMatrix::zeros(nu, nu),
            mass0: DMatrix::zeros(nu, nu),
            norm1: DMatrix::zeros(nu, nu),
            coupling: DMatrix::zeros(0, 0),
            gradient: DMatrix::zeros(0, 0),
            trilinear: Vec::new(),
        };

        let element_rule = quadrature_rule(ops.cell.entity(), degree)?;
        let mut grad_gram = DMatrix::zeros(nu, nu);
        for (p, w) in element_rule.iter() {
            let tab = ops.rtn.basis().tabulate(p);
            for a in 0..nt {
                for b in 0..nt {
                    ops.rtn_mass[(a, b)] += w * tab.values[a].dot(&tab.values[b]);
                    grad_gram[(a, b)] += w * tab.grads[a].component_mul(&tab.grads[b]).sum();
                }
            }
        }
        for f in 0..3 {
            let rule = quadrature_rule(ops.cell.faces[f].entity(), degree)?;
            for (p, w) in rule.iter() {
                let d = ops.face_difference(f, p);
                ops.jump.gemm_tr(w, &d, &d, 1.0);
            }
        }
        ops.mass0.view_mut((0, 0), (nt, nt)).copy_from(&ops.rtn_mass);
        ops.mass0 += h * &ops.jump;
        ops.norm1 = grad_gram + &ops.jump / h;

        ops.build_reconstruction(degree)?;
        ops.build_stabilization(degree)?;
        ops.build_gradient(degree)?;
        ops.build_trilinear(degree)?;
        Ok(ops)
    }

    /// Values at `p` of the element component of every local unknown (2 × n_u).
    pub fn element_values(&self, p: &Point) -> Matrix2xX<f64> {
        let mut m = Matrix2xX::zeros(self.sizes.vector());
        for (a, v) in self.rtn.basis().values(p).iter().enumerate() {
            m.set_column(a, v);
        }
        m
    }

    /// Values at `p`, a point of local face `f`, of the face component of every local unknown.
    pub fn face_values(&self, f: usize, p: &Point) -> Matrix2xX<f64> {
        let mut m = Matrix2xX::zeros(self.sizes.vector());
        let phi = self.faces[f].values(p);
        let off = self.sizes.face_vector_offset(f);
        let n = self.sizes.face_scalar;
        for j in 0..n {
            m[(0, off + j)] = phi[j];
            m[(1, off + n + j)] = phi[j];
        }
        m
    }

    /// `v_F(p) - v_T(p)` as a linear map of the local unknowns.
    pub fn face_difference(&self, f: usize, p: &Point) -> Matrix2xX<f64> {
        self.face_values(f, p) - self.element_values(p)
    }

    fn build_reconstruction(&mut self, degree: usize) -> Result<()> {
        let nr = self.recon_basis.dim();
        let nu = self.sizes.vector();
        let nt = self.sizes.rtn;
        let k = self.sizes.k;
        let element_rule = quadrature_rule(self.cell.entity(), degree)?;

        let mut stiffness = DMatrix::zeros(nr, nr);
        let mut integrals = DVector::zeros(nr);
        let mut rhs = DMatrix::zeros(2 * nr, nu);
        for (p, w) in element_rule.iter() {
            let g = self.recon_basis.gradients(p);
            let psi = self.recon_basis.values(p);
            integrals.axpy(w, &psi, 1.0);
            for i in 0..nr {
                for j in 0..nr {
                    stiffness[(i, j)] += w * g[i].dot(&g[j]);
                }
            }
            let tab = self.rtn.basis().tabulate(p);
            for c in 0..2 {
                for i in 0..nr {
                    for b in 0..nt {
                        let row = tab.grads[b].row(c);
                        rhs[(c * nr + i, b)] += w * (row[0] * g[i].x + row[1] * g[i].y);
                    }
                }
            }
        }
        for f in 0..3 {
            let normal = self.cell.faces[f].normal;
            let rule = quadrature_rule(self.cell.faces[f].entity(), degree)?;
            for (p, w) in rule.iter() {
                let g = self.recon_basis.gradients(p);
                let d = self.face_difference(f, p);
                for c in 0..2 {
                    for i in 0..nr {
                        let gn = g[i].dot(&normal);
                        for col in 0..nu {
                            rhs[(c * nr + i, col)] += w * gn * d[(c, col)];
                        }
                    }
                }
            }
        }

        // mean closure replaces the equation tested with constants
        let mut mean = DMatrix::zeros(2, nu);
        if k == 0 {
            for f in 0..3 {
                let face = &self.cell.faces[f];
                let rule = quadrature_rule(face.entity(), degree)?;
                for (p, w) in rule.iter() {
                    mean += (w * face.distance / 2.0) * self.face_values(f, p);
                }
            }
        } else {
            for (p, w) in element_rule.iter() {
                mean += w * self.element_values(p);
            }
        }
        let constant = (0..nr)
            .max_by(|&a, &b| integrals[a].abs().total_cmp(&integrals[b].abs()))
            .unwrap();
        let mut system = DMatrix::zeros(2 * nr, 2 * nr);
        for c in 0..2 {
            for i in 0..nr {
                for j in 0..nr {
                    system[(c * nr + i, c * nr + j)] = if i == constant { integrals[j] } else { stiffness[(i, j)] };
                }
            }
            rhs.row_mut(c * nr + constant).copy_from(&mean.row(c));
        }
        let lu = system.lu();
        let recon = lu.solve(&rhs).ok_or(Error::Singular { what: "reconstruction stiffness" })?;

        let mut block = DMatrix::zeros(2 * nr, 2 * nr);
        block.view_mut((0, 0), (nr, nr)).copy_from(&stiffness);
        block.view_mut((nr, nr), (nr, nr)).copy_from(&stiffness);
        self.consistency = recon.transpose() * block * &recon;
        self.reconstruction = recon;
        Ok(())
    }

    /// Local interpolate of every reconstruction basis function `ψ_i e_c`.
    fn interpolate_reconstruction_basis(&self, degree: usize) -> Result<DMatrix<f64>> {
        let nr = self.recon_basis.dim();
        let nu = self.sizes.vector();
        let nt = self.sizes.rtn;
        let n = self.sizes.face_scalar;
        let mut out = DMatrix::zeros(nu, 2 * nr);
        let element = self.rtn.interpolate_many(
            2 * nr,
            |p| {
                let psi = self.recon_basis.values(p);
                let mut v = vec![Point::zeros(); 2 * nr];
                for i in 0..nr {
                    v[i] = Point::new(psi[i], 0.0);
                    v[nr + i] = Point::new(0.0, psi[i]);
                }
                v
            },
            degree,
        )?;
        out.view_mut((0, 0), (nt, 2 * nr)).copy_from(&element);
        for f in 0..3 {
            let off = self.sizes.face_vector_offset(f);
            let rule = quadrature_rule(self.cell.faces[f].entity(), degree)?;
            for (p, w) in rule.iter() {
                let phi = self.faces[f].values(p);
                let psi = self.recon_basis.values(p);
                for j in 0..n {
                    for i in 0..nr {
                        out[(off + j, i)] += w * phi[j] * psi[i];
                        out[(off + n + j, nr + i)] += w * phi[j] * psi[i];
                    }
                }
            }
        }
        Ok(out)
    }

    fn build_stabilization(&mut self, degree: usize) -> Result<()> {
        let nu = self.sizes.vector();
        let nt = self.sizes.rtn;
        let nf = self.sizes.face_vector;
        let h = self.cell.diameter;
        let interp = self.interpolate_reconstruction_basis(degree)?;
        let delta = interp * &self.reconstruction - DMatrix::identity(nu, nu);
        let dt = delta.rows(0, nt);
        let mut s = (self.lambda / (h * h)) * dt.transpose() * &self.rtn_mass * dt;
        for f in 0..3 {
            let df = delta.rows(self.sizes.face_vector_offset(f), nf);
            s += (1.0 / h) * df.transpose() * df;
        }
        self.stabilization = s;
        self.diffusion = &self.consistency + &self.stabilization;
        Ok(())
    }

    fn build_gradient(&mut self, degree: usize) -> Result<()> {
        let nt = self.sizes.rtn;
        let np = self.sizes.scalar();
        let ne = self.sizes.element_scalar;
        let mut rhs = DMatrix::zeros(nt, np);
        let rule = quadrature_rule(self.cell.entity(), degree)?;
        for (p, w) in rule.iter() {
            let tab = self.rtn.basis().tabulate(p);
            let q = self.scalar.values(p);
            for a in 0..nt {
                for j in 0..ne {
                    rhs[(a, j)] -= w * q[j] * tab.divs[a];
                }
            }
        }
        for f in 0..3 {
            let normal = self.cell.faces[f].normal;
            let off = self.sizes.face_scalar_offset(f);
            let rule = quadrature_rule(self.cell.faces[f].entity(), degree)?;
            for (p, w) in rule.iter() {
                let values = self.rtn.basis().values(p);
                let q = self.faces[f].values(p);
                for a in 0..nt {
                    let vn = values[a].dot(&normal);
                    for j in 0..self.sizes.face_scalar {
                        rhs[(a, off + j)] += w * q[j] * vn;
                    }
                }
            }
        }
        let chol = self
            .rtn_mass
            .clone()
            .cholesky()
            .ok_or(Error::Singular { what: "RTN mass" })?;
        self.gradient = chol.solve(&rhs);
        self.coupling = rhs;
        Ok(())
    }

    fn build_trilinear(&mut self, degree: usize) -> Result<()> {
        let nt = self.sizes.rtn;
        let nu = self.sizes.vector();
        let mut tri = vec![DMatrix::zeros(nu, nu); nt];
        let rule = quadrature_rule(self.cell.entity(), degree)?;
        for (p, w) in rule.iter() {
            let tab = self.rtn.basis().tabulate(p);
            for (a, ta) in tri.iter_mut().enumerate() {
                let wa = tab.values[a];
                for i in 0..nt {
                    let conv = tab.grads[i] * wa;
                    for j in 0..nt {
                        ta[(i, j)] += w * conv.dot(&tab.values[j]);
                    }
                }
            }
        }
        for f in 0..3 {
            let normal = self.cell.faces[f].normal;
            let rule = quadrature_rule(self.cell.faces[f].entity(), degree)?;
            for (p, w) in rule.iter() {
                let el = self.element_values(p);
                let fa = self.face_values(f, p);
                let diff = &fa - &el;
                let sum = &fa + &el;
                let outer = diff.transpose() * sum;
                for (a, ta) in tri.iter_mut().enumerate() {
                    let wn = el[(0, a)] * normal.x + el[(1, a)] * normal.y;
                    *ta += (0.5 * w * wn) * &outer;
                }
            }
        }
        self.trilinear = tri;
        Ok(())
    }

    /// `Σ_a w_a trilinear[a]`, the matrix of `(v, z) ↦ t_T(w, v, z)`.
    pub fn convection_matrix(&self, w_element: &[f64]) -> DMatrix<f64> {
        let nu = self.sizes.vector();
        let mut m = DMatrix::zeros(nu, nu);
        for (wa, ta) in w_element.iter().zip(&self.trilinear) {
            if *wa != 0.0 {
                m += *wa * ta;
            }
        }
        m
    }

    /// Vector of `a ↦ t_T(φ_a, v, z)`.
    pub fn convection_transport_derivative(&self, v: &DVector<f64>, z: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.trilinear.len(), self.trilinear.iter().map(|t| v.dot(&(t * z))))
    }
}
