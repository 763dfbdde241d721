use nalgebra::DVector;

use super::{
    assemble_jacobian, assemble_residual, static_condense_solve, time_step_count, upwind_coefficients,
    CondensationStats, DofLayout, LinearSolver, ProblemData, SimulationState, SolverConfig, SparseMatrix, StepData,
};
use crate::hybrid::{check_divergence_free, DivergenceReport, HybridScalarField, HybridSpace, HybridVectorField};
use crate::{Error, Point, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct NewtonReport {
    /// Number of linear solves performed.
    pub iterations: usize,
    /// Euclidean residual norm before each iteration and at exit.
    pub residuals: Vec<f64>,
    /// Relative difference between condensed and direct corrections, per iteration.
    pub cross_check: Vec<f64>,
    pub condensation: Option<CondensationStats>,
}

fn linear_solve(
    layout: &DofLayout,
    config: &SolverConfig,
    jac: &SparseMatrix,
    rhs: &DVector<f64>,
    report: &mut NewtonReport,
) -> Result<DVector<f64>> {
    let blocks: Vec<Vec<usize>> = (0..layout.num_elements).map(|e| layout.interior_block(e)).collect();
    match (config.linear_solver, config.cross_check) {
        (LinearSolver::Direct, false) => jac.solve(rhs),
        (LinearSolver::Condensed, false) => {
            let (x, stats) = static_condense_solve(jac, rhs, &blocks)?;
            report.condensation = Some(stats);
            Ok(x)
        }
        (solver, true) => {
            let direct = jac.solve(rhs)?;
            let (condensed, stats) = static_condense_solve(jac, rhs, &blocks)?;
            report.condensation = Some(stats);
            let scale = direct.norm().max(f64::MIN_POSITIVE);
            report.cross_check.push((&direct - &condensed).norm() / scale);
            Ok(if solver == LinearSolver::Direct { direct } else { condensed })
        }
    }
}

/// Newton iterations for one Crank–Nicolson step, starting from `initial`.
pub fn newton_solve(
    space: &HybridSpace,
    layout: &DofLayout,
    config: &SolverConfig,
    step: &StepData,
    initial: DVector<f64>,
) -> Result<(DVector<f64>, NewtonReport)> {
    let mut x = initial;
    let mut report = NewtonReport::default();
    let mut r0 = 0.0;
    for it in 0..=config.newton_max_iter {
        let r = assemble_residual(space, layout, config, step, &x)?;
        let norm = r.norm();
        report.residuals.push(norm);
        if it == 0 {
            r0 = norm;
        }
        if norm <= config.newton_rtol * r0 || norm <= config.newton_atol {
            return Ok((x, report));
        }
        if it == config.newton_max_iter {
            break;
        }
        let jac = assemble_jacobian(space, layout, config, step, &x)?;
        let dx = linear_solve(layout, config, &jac, &(-r), &mut report)?;
        x += dx;
        report.iterations += 1;
    }
    Err(Error::NewtonDiverged {
        iterations: report.iterations,
        residual: *report.residuals.last().unwrap(),
        initial: r0,
    })
}

/// States at every time level with the diagnostics of every step.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub dt: f64,
    pub states: Vec<SimulationState>,
    /// Newton report of the step leading to `states[n + 1]`.
    pub newton: Vec<NewtonReport>,
    /// Divergence reports of `(u, b)` for every state.
    pub divergence: Vec<(DivergenceReport, DivergenceReport)>,
}

fn impose_boundary(
    space: &HybridSpace,
    v: &mut HybridVectorField,
    g: impl Fn(&Point) -> Point,
) -> Result<()> {
    for f in 0..space.num_faces() {
        if space.mesh().is_boundary(f) {
            let c = space.project_face_vector(f, &g)?;
            v.face_block_mut(f).copy_from(&c);
        }
    }
    Ok(())
}

fn check_state(space: &HybridSpace, config: &SolverConfig, u: &HybridVectorField, b: &HybridVectorField)
    -> Result<(DivergenceReport, DivergenceReport)> {
    let du = check_divergence_free(space, u)?;
    let db = check_divergence_free(space, b)?;
    for d in [du, db] {
        if !d.passes(config.divergence_tol) {
            return Err(Error::NotSolenoidal { relative: d.max_relative() });
        }
    }
    Ok((du, db))
}

/// Runs the Crank–Nicolson scheme from the interpolates of `u0` and `b0`
/// up to `config.final_time`.
pub fn run_simulation(
    space: &HybridSpace,
    config: &SolverConfig,
    data: &dyn ProblemData,
    u0: impl Fn(&Point) -> Point,
    b0: impl Fn(&Point) -> Point,
) -> Result<Trajectory> {
    config.validate()?;
    if config.k != space.degree() {
        return Err(Error::Mismatch(format!("solver degree {} on a space of degree {}", config.k, space.degree())));
    }
    let layout = DofLayout::new(space);
    let steps = config
        .num_steps
        .unwrap_or_else(|| time_step_count(space.geometry().h, config.k));
    let dt = config.final_time / steps as f64;

    let mut u = space.interpolate_velocity(&u0, false)?;
    let mut b = space.interpolate_velocity(&b0, false)?;
    impose_boundary(space, &mut u, |p| data.u_boundary(0.0, p))?;
    impose_boundary(space, &mut b, |p| data.b_boundary(0.0, p))?;
    let homogeneous = (0..space.num_faces())
        .filter(|&f| space.mesh().is_boundary(f))
        .all(|f| u.face_block(f).iter().chain(b.face_block(f).iter()).all(|x| *x == 0.0));
    if homogeneous {
        u.apply_homogeneous_bc(space);
        b.apply_homogeneous_bc(space);
    }
    let beta = upwind_coefficients(space, &u, &b, config.c_stab);
    let initial = SimulationState {
        step: 0,
        time: 0.0,
        p: HybridScalarField::zeros(space, true),
        r: HybridScalarField::zeros(space, true),
        gamma: beta.clone(),
        beta,
        u,
        b,
    };
    let mut trajectory = Trajectory {
        dt,
        divergence: vec![(check_divergence_free(space, &initial.u)?, check_divergence_free(space, &initial.b)?)],
        states: vec![initial],
        newton: Vec::new(),
    };

    for n in 1..=steps {
        let wrap = |e: Error| Error::Step { step: n, source: Box::new(e) };
        let prev = trajectory.states.last().unwrap();
        let beta = upwind_coefficients(space, &prev.u, &prev.b, config.c_stab);
        let x_prev = layout.pack(&prev.u, &prev.b, &prev.p, &prev.r, [0.0, 0.0]);
        let (t0, t1) = ((n - 1) as f64 * dt, n as f64 * dt);
        let step = StepData::new(space, &layout, data, x_prev.clone(), t0, t1, beta.clone(), beta.clone())
            .map_err(wrap)?;
        let mut guess = x_prev;
        for &(row, value) in &step.dirichlet {
            guess[row] = value;
        }
        let (x, report) = newton_solve(space, &layout, config, &step, guess).map_err(wrap)?;
        let (u, b, p, r) = layout.unpack(space, &x, homogeneous).map_err(wrap)?;
        let div = check_state(space, config, &u, &b).map_err(wrap)?;
        trajectory.divergence.push(div);
        trajectory.newton.push(report);
        trajectory.states.push(SimulationState {
            step: n,
            time: t1,
            u,
            b,
            p,
            r,
            gamma: beta.clone(),
            beta,
        });
    }
    Ok(trajectory)
}
