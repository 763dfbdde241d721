//! Manufactured solutions, energy-norm errors, convergence rates and
//! stability diagnostics.

mod exact;

pub use exact::{exact_solution_2d, forcing_terms_2d, ExactValues, ManufacturedProblem};

use nalgebra::DMatrix;

use crate::hybrid::{inner_product_0h, norm_1h, upwind_form, HybridSpace, HybridVectorField};
use crate::mesh::Mesh;
use crate::solver::{element_sup, run_simulation, SolverConfig, Trajectory};
use crate::{Error, Point, Result};

/// Energy-norm error and its components.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    /// `|||(e_u, e_b)|||`.
    pub energy: f64,
    pub max_u_0h: f64,
    pub max_b_0h: f64,
    /// `∫ ν ‖e_u‖_{1,h}^2`.
    pub u_diffusion: f64,
    /// `∫ μ ‖e_b‖_{1,h}^2`.
    pub b_diffusion: f64,
    /// `∫ |e_u|_{β,h}^2`.
    pub u_upwind: f64,
    /// `∫ |e_b|_{γ,h}^2`.
    pub b_upwind: f64,
    pub h: f64,
    pub dofs: usize,
    pub wall_time: f64,
}

impl ErrorReport {
    /// Sum of the squared components.
    pub fn components_sum(&self) -> f64 {
        self.max_u_0h + self.max_b_0h + self.u_diffusion + self.b_diffusion + self.u_upwind + self.b_upwind
    }
}

fn trapezoid(values: &[f64], dt: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => dt * (0.5 * values[0] + values[1..n - 1].iter().sum::<f64>() + 0.5 * values[n - 1]),
    }
}

/// Energy norm of `(u_h - I u, b_h - I b)` over a trajectory: maxima in time
/// of the `(·,·)_{0,h}` norms plus trapezoidal time integrals of the
/// diffusion and upwind seminorms, with the coefficients used by the run.
pub fn energy_error(
    space: &HybridSpace,
    trajectory: &Trajectory,
    exact_u: &dyn Fn(f64, &Point) -> Point,
    exact_b: &dyn Fn(f64, &Point) -> Point,
    config: &SolverConfig,
) -> Result<ErrorReport> {
    let mut u0h = Vec::new();
    let mut b0h = Vec::new();
    let mut u1h = Vec::new();
    let mut b1h = Vec::new();
    let mut ub = Vec::new();
    let mut bg = Vec::new();
    for state in &trajectory.states {
        let mut eu = state.u.clone();
        eu.axpy(-1.0, &space.interpolate_velocity(|p| exact_u(state.time, p), false)?)?;
        let mut eb = state.b.clone();
        eb.axpy(-1.0, &space.interpolate_velocity(|p| exact_b(state.time, p), false)?)?;
        u0h.push(inner_product_0h(space, &eu, &eu)?);
        b0h.push(inner_product_0h(space, &eb, &eb)?);
        u1h.push(config.nu * norm_1h(space, &eu)?.powi(2));
        b1h.push(config.mu * norm_1h(space, &eb)?.powi(2));
        ub.push(upwind_form(space, &state.beta, &eu, &eu)?);
        bg.push(upwind_form(space, &state.gamma, &eb, &eb)?);
    }
    let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    let dt = trajectory.dt;
    let mut report = ErrorReport {
        energy: 0.0,
        max_u_0h: max(&u0h),
        max_b_0h: max(&b0h),
        u_diffusion: trapezoid(&u1h, dt),
        b_diffusion: trapezoid(&b1h, dt),
        u_upwind: trapezoid(&ub, dt),
        b_upwind: trapezoid(&bg, dt),
        h: space.geometry().h,
        dofs: crate::solver::DofLayout::new(space).total,
        wall_time: 0.0,
    };
    report.energy = report.components_sum().sqrt();
    if !report.energy.is_finite() {
        return Err(Error::NotFinite("energy error"));
    }
    Ok(report)
}

/// Runs the manufactured problem with `config.nu`, `config.mu` on `mesh`
/// and measures the energy error of the resulting trajectory.
pub fn solve_manufactured(mesh: &Mesh, config: &SolverConfig) -> Result<(Trajectory, ErrorReport)> {
    let start = std::time::Instant::now();
    let space = HybridSpace::new(mesh, config.k)?;
    let problem = ManufacturedProblem::new(config.nu, config.mu);
    let trajectory = run_simulation(&space, config, &problem, |p| problem.u(0.0, p), |p| problem.b(0.0, p))?;
    let mut report =
        energy_error(&space, &trajectory, &|t, p| problem.u(t, p), &|t, p| problem.b(t, p), config)?;
    report.wall_time = start.elapsed().as_secs_f64();
    Ok((trajectory, report))
}

/// `rate_i = log(e_i / e_{i+1}) / log(h_i / h_{i+1})`.
pub fn compute_eoc(errors: &[f64], hs: &[f64]) -> Result<Vec<f64>> {
    if errors.len() != hs.len() {
        return Err(Error::Mismatch(format!("{} errors for {} mesh sizes", errors.len(), hs.len())));
    }
    Ok(errors
        .windows(2)
        .zip(hs.windows(2))
        .map(|(e, h)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
        .collect())
}

/// Smallest generalized singular value of `B_h` between `‖·‖_{1,h}` on
/// `U^k_{h,0}` and the pressure norm `(‖q_h‖^2 + Σ_T h_T^2 ‖G_T q‖^2)^{1/2}`
/// on zero-mean pressures, from a dense eigenvalue computation.
pub fn estimate_infsup_constant(mesh: &Mesh, k: usize) -> Result<f64> {
    let space = HybridSpace::new(mesh, k)?;
    let s = space.sizes();
    let ne = space.num_elements();
    let nf = space.num_faces();

    // velocity unknowns of U_{h,0}: element blocks and interior face blocks
    let mut vmap = vec![usize::MAX; ne * s.rtn + nf * s.face_vector];
    let mut nv = 0;
    for (i, slot) in vmap.iter_mut().enumerate() {
        let boundary = i >= ne * s.rtn && mesh.is_boundary((i - ne * s.rtn) / s.face_vector);
        if !boundary {
            *slot = nv;
            nv += 1;
        }
    }
    let np = ne * s.element_scalar + nf * s.face_scalar;
    let mut a1 = DMatrix::<f64>::zeros(nv, nv);
    let mut b = DMatrix::<f64>::zeros(nv, np);
    let mut mp = DMatrix::<f64>::zeros(np, np);
    for e in 0..ne {
        let l = space.local(e);
        let vd = space.vector_dofs(e);
        let pd = space.scalar_dofs(e);
        for (i, &gi) in vd.iter().enumerate() {
            if vmap[gi] == usize::MAX {
                continue;
            }
            for (j, &gj) in vd.iter().enumerate() {
                if vmap[gj] != usize::MAX {
                    a1[(vmap[gi], vmap[gj])] += l.norm1[(i, j)];
                }
            }
        }
        for a in 0..s.rtn {
            for (j, &gj) in pd.iter().enumerate() {
                b[(vmap[vd[a]], gj)] += l.coupling[(a, j)];
            }
        }
        let h2 = l.cell.diameter.powi(2);
        let weighted = h2 * l.gradient.transpose() * &l.rtn_mass * &l.gradient;
        for (i, &gi) in pd.iter().enumerate() {
            for (j, &gj) in pd.iter().enumerate() {
                mp[(gi, gj)] += weighted[(i, j)];
            }
        }
        for i in 0..s.element_scalar {
            mp[(pd[i], pd[i])] += 1.0;
        }
    }
    let a1 = a1.cholesky().ok_or(Error::Singular { what: "velocity norm" })?;
    let schur = b.transpose() * a1.solve(&b);
    let lp = mp.cholesky().ok_or(Error::Singular { what: "pressure norm" })?;
    let l = lp.l();
    let linv = l.clone().try_inverse().ok_or(Error::Singular { what: "pressure norm factor" })?;
    let c: DMatrix<f64> = &linv * schur * linv.transpose();
    let c: DMatrix<f64> = (&c + c.transpose()) * 0.5;
    let mut eig: Vec<f64> = c.symmetric_eigen().eigenvalues.iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    // the smallest eigenvalue belongs to the constant pressure
    Ok(eig[1].max(0.0).sqrt())
}

/// Local Péclet numbers and the convection-dominance indicator.
#[derive(Debug, Clone, PartialEq)]
pub struct PecletReport {
    /// `Pe_T = (α_T + ‖w‖_{L∞(T)}) h_T / η`.
    pub peclet: Vec<f64>,
    /// `max ‖w‖_{L∞(T)} / α_T` over elements with `Pe_T > 1`, or 0.
    pub chi: f64,
}

pub fn peclet_report(space: &HybridSpace, eta: f64, w: &HybridVectorField, alpha: &[f64]) -> Result<PecletReport> {
    if alpha.len() != space.num_elements() {
        return Err(Error::Mismatch("one coefficient per element is required".into()));
    }
    if !(eta > 0.0) {
        return Err(Error::Config("diffusion coefficient must be positive".into()));
    }
    let mut peclet = Vec::with_capacity(alpha.len());
    let mut chi: f64 = 0.0;
    for (e, &a) in alpha.iter().enumerate() {
        let wmax = element_sup(space, w, e);
        let pe = (a + wmax) * space.local(e).cell.diameter / eta;
        if pe > 1.0 {
            chi = chi.max(wmax / a);
        }
        peclet.push(pe);
    }
    Ok(PecletReport { peclet, chi })
}
