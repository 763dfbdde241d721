use nalgebra::{DMatrix, DVector};

use super::{DofLayout, ProblemData, SolverConfig, SparseMatrix};
use crate::hybrid::HybridSpace;
use crate::polyspace::{default_quadrature_degree, quadrature_rule};
use crate::{Error, Result};

/// Everything that stays fixed during the Newton iterations of one time step.
#[derive(Debug, Clone)]
pub struct StepData {
    pub dt: f64,
    pub beta: Vec<f64>,
    pub gamma: Vec<f64>,
    /// Global unknowns at the beginning of the step.
    pub previous: DVector<f64>,
    /// Time-averaged load vectors on the element rows of u and b.
    pub load: DVector<f64>,
    /// Boundary face unknowns and the values imposed on them at the end of the step.
    pub dirichlet: Vec<(usize, f64)>,
}

impl StepData {
    /// Loads averaged over `t0` and `t1`, Dirichlet data at `t1`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        space: &HybridSpace,
        layout: &DofLayout,
        data: &dyn ProblemData,
        previous: DVector<f64>,
        t0: f64,
        t1: f64,
        beta: Vec<f64>,
        gamma: Vec<f64>,
    ) -> Result<Self> {
        let mut load = DVector::zeros(layout.total);
        let nt = layout.rtn;
        for e in 0..space.num_elements() {
            let l = space.local(e);
            let rule = quadrature_rule(l.cell.entity(), default_quadrature_degree(space.degree()))?;
            for (p, w) in rule.iter() {
                let phi = l.rtn.basis().values(p);
                let f = 0.5 * (data.f(t0, p) + data.f(t1, p));
                let g = 0.5 * (data.g(t0, p) + data.g(t1, p));
                for a in 0..nt {
                    load[layout.u_elements + e * nt + a] += w * f.dot(&phi[a]);
                    load[layout.b_elements + e * nt + a] += w * g.dot(&phi[a]);
                }
            }
        }
        let mut dirichlet = Vec::new();
        for f in 0..space.num_faces() {
            if !space.mesh().is_boundary(f) {
                continue;
            }
            let u = space.project_face_vector(f, |p| data.u_boundary(t1, p))?;
            let b = space.project_face_vector(f, |p| data.b_boundary(t1, p))?;
            dirichlet.extend(layout.vector_face_dofs(0, f).zip(u.iter().copied()));
            dirichlet.extend(layout.vector_face_dofs(1, f).zip(b.iter().copied()));
        }
        Ok(Self {
            dt: t1 - t0,
            beta,
            gamma,
            previous,
            load,
            dirichlet,
        })
    }
}

fn gather(x: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
    DVector::from_iterator(idx.len(), idx.iter().map(|&i| x[i]))
}

/// Matrix whose column `a` is `trilinear[a]^T v`: derivative of
/// `z ↦ t_T(w, v, z)` with respect to the element unknowns of `w`.
fn transport_derivative(space: &HybridSpace, e: usize, v: &DVector<f64>) -> DMatrix<f64> {
    let l = space.local(e);
    let mut d = DMatrix::zeros(l.sizes.vector(), l.sizes.rtn);
    for (a, t) in l.trilinear.iter().enumerate() {
        d.set_column(a, &(t.transpose() * v));
    }
    d
}

/// Momentum and induction operators without time derivative and pressure terms.
fn spatial(
    space: &HybridSpace,
    config: &SolverConfig,
    step: &StepData,
    e: usize,
    u: &DVector<f64>,
    b: &DVector<f64>,
) -> (DVector<f64>, DVector<f64>) {
    let l = space.local(e);
    let nt = l.sizes.rtn;
    let mut ru = config.nu * (&l.diffusion * u) + step.beta[e] * (&l.jump * u);
    let mut rb = config.mu * (&l.diffusion * b) + step.gamma[e] * (&l.jump * b);
    if config.convection {
        let cu = l.convection_matrix(&u.as_slice()[..nt]);
        let cb = l.convection_matrix(&b.as_slice()[..nt]);
        ru += cu.tr_mul(u) - cb.tr_mul(b);
        rb += cu.tr_mul(b) - cb.tr_mul(u);
    }
    (ru, rb)
}

fn check_inputs(layout: &DofLayout, step: &StepData, x: &DVector<f64>) -> Result<()> {
    if x.len() != layout.total || step.previous.len() != layout.total || step.load.len() != layout.total {
        return Err(Error::Mismatch(format!("global vectors must have {} entries", layout.total)));
    }
    if step.beta.len() != layout.num_elements || step.gamma.len() != layout.num_elements {
        return Err(Error::Mismatch("one upwind coefficient per element is required".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NotFinite("Newton iterate"));
    }
    Ok(())
}

/// Residual of the Crank–Nicolson system at the candidate `x` for the step
/// described by `step`.
pub fn assemble_residual(
    space: &HybridSpace,
    layout: &DofLayout,
    config: &SolverConfig,
    step: &StepData,
    x: &DVector<f64>,
) -> Result<DVector<f64>> {
    check_inputs(layout, step, x)?;
    let mut r = -&step.load;
    for e in 0..space.num_elements() {
        let l = space.local(e);
        let nt = l.sizes.rtn;
        let du = layout.vector_dofs(space, 0, e);
        let db = layout.vector_dofs(space, 1, e);
        let dp = layout.scalar_dofs(space, 0, e);
        let dr = layout.scalar_dofs(space, 1, e);
        let (u1, b1) = (gather(x, &du), gather(x, &db));
        let (u0, b0) = (gather(&step.previous, &du), gather(&step.previous, &db));
        let (p, q) = (gather(x, &dp), gather(x, &dr));

        let (su1, sb1) = spatial(space, config, step, e, &u1, &b1);
        let (su0, sb0) = spatial(space, config, step, e, &u0, &b0);
        let mut ru = (&l.mass0 * (&u1 - &u0)) / step.dt + 0.5 * (su1 + su0);
        let mut rb = (&l.mass0 * (&b1 - &b0)) / step.dt + 0.5 * (sb1 + sb0);
        ru.rows_mut(0, nt).gemv(1.0, &l.coupling, &p, 1.0);
        rb.rows_mut(0, nt).gemv(1.0, &l.coupling, &q, 1.0);
        let rp = l.coupling.tr_mul(&u1.rows(0, nt));
        let rr = l.coupling.tr_mul(&b1.rows(0, nt));

        let integrals = space.element_scalar_integrals(e);
        for (i, &g) in du.iter().enumerate() {
            r[g] += ru[i];
        }
        for (i, &g) in db.iter().enumerate() {
            r[g] += rb[i];
        }
        for (i, &g) in dp.iter().enumerate() {
            r[g] += rp[i];
        }
        for (i, &g) in dr.iter().enumerate() {
            r[g] += rr[i];
        }
        for (i, w) in integrals.iter().enumerate() {
            r[dp[i]] += x[layout.lambda_p] * w;
            r[dr[i]] += x[layout.lambda_r] * w;
            r[layout.lambda_p] += w * p[i];
            r[layout.lambda_r] += w * q[i];
        }
    }
    for (f, normal) in boundary_normals(space) {
        let n = layout.face_scalar;
        for (field, scalar_start) in [(0, layout.p_faces), (1, layout.r_faces)] {
            let v = layout.vector_face_dofs(field, f).start;
            for j in 0..n {
                r[scalar_start + f * n + j] -= normal.x * x[v + j] + normal.y * x[v + n + j];
            }
        }
    }
    for &(row, value) in &step.dirichlet {
        r[row] = x[row] - value;
    }
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::NotFinite("residual"));
    }
    Ok(r)
}

fn boundary_normals(space: &HybridSpace) -> Vec<(usize, crate::Point)> {
    let mesh = space.mesh();
    (0..space.num_faces())
        .filter(|&f| mesh.is_boundary(f))
        .map(|f| {
            let (e, _) = mesh.face_elements(f);
            let i = mesh.element_faces(e).iter().position(|ef| ef.face == f).unwrap();
            (f, space.local(e).cell.faces[i].normal)
        })
        .collect()
}

/// Exact derivative of [`assemble_residual`] with respect to `x`, with the
/// upwind coefficients held fixed.
pub fn assemble_jacobian(
    space: &HybridSpace,
    layout: &DofLayout,
    config: &SolverConfig,
    step: &StepData,
    x: &DVector<f64>,
) -> Result<SparseMatrix> {
    check_inputs(layout, step, x)?;
    let mut constrained = vec![false; layout.total];
    for &(row, _) in &step.dirichlet {
        constrained[row] = true;
    }
    let mut jac = SparseMatrix::new(layout.total);
    let push_block = |jac: &mut SparseMatrix, rows: &[usize], cols: &[usize], m: &DMatrix<f64>| {
        for (i, &gr) in rows.iter().enumerate() {
            if constrained[gr] {
                continue;
            }
            for (j, &gc) in cols.iter().enumerate() {
                jac.push(gr, gc, m[(i, j)]);
            }
        }
    };
    for e in 0..space.num_elements() {
        let l = space.local(e);
        let nt = l.sizes.rtn;
        let du = layout.vector_dofs(space, 0, e);
        let db = layout.vector_dofs(space, 1, e);
        let dp = layout.scalar_dofs(space, 0, e);
        let dr = layout.scalar_dofs(space, 1, e);
        let (u1, b1) = (gather(x, &du), gather(x, &db));

        let base = &l.mass0 / step.dt;
        let mut juu = &base + 0.5 * (config.nu * &l.diffusion + step.beta[e] * &l.jump);
        let mut jbb = &base + 0.5 * (config.mu * &l.diffusion + step.gamma[e] * &l.jump);
        if config.convection {
            let cu = l.convection_matrix(&u1.as_slice()[..nt]).transpose();
            let cb = l.convection_matrix(&b1.as_slice()[..nt]).transpose();
            let du_t = transport_derivative(space, e, &u1);
            let db_t = transport_derivative(space, e, &b1);
            juu += 0.5 * &cu;
            jbb += 0.5 * &cu;
            let mut jub = -0.5 * &cb;
            let mut jbu = -0.5 * &cb;
            {
                let mut c = juu.columns_mut(0, nt);
                c += 0.5 * &du_t;
            }
            {
                let mut c = jbb.columns_mut(0, nt);
                c -= 0.5 * &du_t;
            }
            {
                let mut c = jub.columns_mut(0, nt);
                c -= 0.5 * &db_t;
            }
            {
                let mut c = jbu.columns_mut(0, nt);
                c += 0.5 * &db_t;
            }
            push_block(&mut jac, &du, &db, &jub);
            push_block(&mut jac, &db, &du, &jbu);
        }
        push_block(&mut jac, &du, &du, &juu);
        push_block(&mut jac, &db, &db, &jbb);
        push_block(&mut jac, &du[..nt], &dp, &l.coupling);
        push_block(&mut jac, &db[..nt], &dr, &l.coupling);
        let ct = l.coupling.transpose();
        push_block(&mut jac, &dp, &du[..nt], &ct);
        push_block(&mut jac, &dr, &db[..nt], &ct);
        let integrals = space.element_scalar_integrals(e);
        for (i, &w) in integrals.iter().enumerate() {
            jac.push(dp[i], layout.lambda_p, w);
            jac.push(layout.lambda_p, dp[i], w);
            jac.push(dr[i], layout.lambda_r, w);
            jac.push(layout.lambda_r, dr[i], w);
        }
    }
    for (f, normal) in boundary_normals(space) {
        let n = layout.face_scalar;
        for (field, scalar_start) in [(0, layout.p_faces), (1, layout.r_faces)] {
            let v = layout.vector_face_dofs(field, f).start;
            for j in 0..n {
                jac.push(scalar_start + f * n + j, v + j, -normal.x);
                jac.push(scalar_start + f * n + j, v + n + j, -normal.y);
            }
        }
    }
    for &(row, _) in &step.dirichlet {
        jac.push(row, row, 1.0);
    }
    jac.compress();
    Ok(jac)
}
