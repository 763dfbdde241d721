use std::f64::consts::PI;

use mhd_hho::hybrid::{HybridScalarField, HybridSpace, HybridVectorField};
use mhd_hho::mesh::generate_structured_mesh;
use mhd_hho::mms::{energy_error, ManufacturedProblem};
use mhd_hho::solver::*;
use mhd_hho::Point;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn space(n: usize, k: usize) -> HybridSpace {
    HybridSpace::new(&generate_structured_mesh(n), k).unwrap()
}

fn stream_velocity(p: &Point) -> Point {
    let (sx, cx) = ((PI * p.x).sin(), (PI * p.x).cos());
    let (sy, cy) = ((PI * p.y).sin(), (PI * p.y).cos());
    Point::new(2.0 * PI * sx * sx * sy * cy, -2.0 * PI * sx * cx * sy * sy)
}

fn random_vector(n: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))
}

/// A step from a random previous state with random upwind coefficients.
fn random_step(s: &HybridSpace, layout: &DofLayout, rng: &mut ChaCha8Rng) -> StepData {
    let ne = s.num_elements();
    let beta: Vec<f64> = (0..ne).map(|_| rng.gen_range(0.1..1.0)).collect();
    let gamma: Vec<f64> = (0..ne).map(|_| rng.gen_range(0.1..1.0)).collect();
    let previous = random_vector(layout.total, rng);
    StepData::new(s, layout, &ManufacturedProblem::new(0.3, 0.7), previous, 0.0, 0.1, beta, gamma).unwrap()
}

struct Forced;

impl ProblemData for Forced {
    fn f(&self, _t: f64, p: &Point) -> Point {
        Point::new((PI * p.y).sin(), 0.0)
    }
    fn g(&self, _t: f64, p: &Point) -> Point {
        Point::new(0.0, (PI * p.x).sin())
    }
}

#[test]
fn time_step_counts() {
    assert_eq!(time_step_count(0.5, 0), 10);
    assert_eq!(time_step_count(0.01, 1), 100);
    assert_eq!(time_step_count(0.01, 2), 1000);
    assert_eq!(time_step_count(2f64.sqrt() / 32.0, 1), 23);
}

#[test]
fn upwind_coefficient_examples() {
    let s = space(2, 0);
    let zero = HybridVectorField::zeros(&s, true);
    assert!(upwind_coefficients(&s, &zero, &zero, 1.0).iter().all(|&b| b == 1e-4));
    let u = s.interpolate_velocity(|_| Point::new(0.7, 0.0), false).unwrap();
    let b = s.interpolate_velocity(|_| Point::new(0.0, -0.5), false).unwrap();
    assert!(upwind_coefficients(&s, &u, &b, 0.0).iter().all(|&b| b == 0.0));
    for beta in upwind_coefficients(&s, &u, &b, 0.5) {
        assert!((beta - 0.6).abs() < 1e-12, "{beta}");
    }
}

#[test]
fn zero_state_has_zero_residual() {
    let s = space(2, 1);
    let layout = DofLayout::new(&s);
    let ne = s.num_elements();
    let step = StepData::new(&s, &layout, &Unforced, DVector::zeros(layout.total), 0.0, 0.1, vec![1e-4; ne], vec![1e-4; ne])
        .unwrap();
    let config = SolverConfig::new(1, 1.0, 1.0);
    let r = assemble_residual(&s, &layout, &config, &step, &DVector::zeros(layout.total)).unwrap();
    assert_eq!(r.norm(), 0.0);
}

#[test]
fn jacobian_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for k in 0..=2 {
        let s = space(2, k);
        let layout = DofLayout::new(&s);
        let step = random_step(&s, &layout, &mut rng);
        let config = SolverConfig::new(k, 0.3, 0.7);
        let x = random_vector(layout.total, &mut rng);
        let d = random_vector(layout.total, &mut rng);
        let r = assemble_residual(&s, &layout, &config, &step, &x).unwrap();
        let jd = assemble_jacobian(&s, &layout, &config, &step, &x).unwrap().mul_vec(&d);
        let eps = [1e-4, 1e-5, 1e-6, 1e-7];
        let errs: Vec<f64> = eps
            .iter()
            .map(|&e| {
                let re = assemble_residual(&s, &layout, &config, &step, &(&x + e * &d)).unwrap();
                ((re - &r) / e - &jd).norm()
            })
            .collect();
        for w in errs.windows(2).zip(eps.windows(2)) {
            let slope = (w.0[0] / w.0[1]).ln() / (w.1[0] / w.1[1]).ln();
            assert!((slope - 1.0).abs() <= 0.1, "k={k}: errors {errs:?}");
        }
    }
}

#[test]
fn residual_is_affine_in_the_pressures() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let s = space(2, 1);
    let layout = DofLayout::new(&s);
    let step = random_step(&s, &layout, &mut rng);
    let config = SolverConfig::new(1, 0.3, 0.7);
    let mut d = DVector::zeros(layout.total);
    for i in (layout.p_elements..layout.u_faces).chain(layout.p_faces..layout.lambda_p) {
        d[i] = rng.gen_range(-1.0..1.0);
    }
    let diff = |x: &DVector<f64>| {
        assemble_residual(&s, &layout, &config, &step, &(x + &d)).unwrap()
            - assemble_residual(&s, &layout, &config, &step, x).unwrap()
    };
    let d1 = diff(&random_vector(layout.total, &mut rng));
    let d2 = diff(&random_vector(layout.total, &mut rng));
    assert!((&d1 - &d2).norm() <= 1e-11 * d1.norm());
}

#[test]
fn stokes_jacobian_has_transposed_coupling_blocks() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let s = space(2, 1);
    let layout = DofLayout::new(&s);
    let step = random_step(&s, &layout, &mut rng);
    let mut config = SolverConfig::new(1, 1.0, 1.0);
    config.convection = false;
    let jac = assemble_jacobian(&s, &layout, &config, &step, &random_vector(layout.total, &mut rng))
        .unwrap()
        .to_dense();
    let velocity = layout.u_elements..layout.b_elements;
    let pressure: Vec<usize> = (layout.p_elements..layout.r_elements).chain(layout.p_faces..layout.r_faces).collect();
    let mut largest: f64 = 0.0;
    for i in velocity {
        for &j in &pressure {
            assert!((jac[(i, j)] - jac[(j, i)]).abs() <= 1e-12);
            largest = largest.max(jac[(i, j)].abs());
        }
    }
    assert!(largest > 0.1);
}

#[test]
fn convective_jacobian_vanishes_at_the_zero_state() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let s = space(2, 0);
    let layout = DofLayout::new(&s);
    let mut step = random_step(&s, &layout, &mut rng);
    step.previous.fill(0.0);
    let x = DVector::zeros(layout.total);
    let mut config = SolverConfig::new(0, 0.3, 0.7);
    let with = assemble_jacobian(&s, &layout, &config, &step, &x).unwrap().to_dense();
    config.convection = false;
    let without = assemble_jacobian(&s, &layout, &config, &step, &x).unwrap().to_dense();
    assert!((with - without).norm() <= 1e-13);
}

#[test]
fn linear_problem_needs_one_newton_iteration() {
    let s = space(4, 0);
    let mut config = SolverConfig::new(0, 1.0, 1.0);
    config.convection = false;
    config.num_steps = Some(3);
    let t = run_simulation(&s, &config, &Forced, stream_velocity, |p| stream_velocity(p) * 0.5).unwrap();
    assert!(t.newton.iter().all(|r| r.iterations == 1), "{:?}", t.newton);
}

#[test]
fn manufactured_step_converges_quickly() {
    let s = space(8, 0);
    let mut config = SolverConfig::new(0, 1.0, 1.0);
    config.num_steps = Some(10);
    config.final_time = 0.1;
    let problem = ManufacturedProblem::new(1.0, 1.0);
    let t = run_simulation(&s, &config, &problem, |p| problem.u(0.0, p), |p| problem.b(0.0, p)).unwrap();
    let report = &t.newton[0];
    assert!(report.iterations <= 5, "{report:?}");
    let (first, last) = (report.residuals[0], *report.residuals.last().unwrap());
    assert!(last <= 1e-8 * first || last <= 1e-12);
}

#[test]
fn zero_data_gives_a_zero_trajectory() {
    let s = space(2, 1);
    let mut config = SolverConfig::new(1, 1.0, 1.0);
    config.num_steps = Some(2);
    let t = run_simulation(&s, &config, &Unforced, |_| Point::zeros(), |_| Point::zeros()).unwrap();
    assert_eq!(t.states.len(), 3);
    for state in &t.states {
        assert_eq!(state.u.as_vector().norm() + state.b.as_vector().norm(), 0.0);
        assert_eq!(state.p.as_vector().norm() + state.r.as_vector().norm(), 0.0);
    }
    assert!(t.newton.iter().all(|r| r.iterations == 0));
}

#[test]
fn every_state_is_divergence_free() {
    let s = space(4, 1);
    let mut config = SolverConfig::new(1, 1e-3, 1e-3);
    config.num_steps = Some(4);
    let t = run_simulation(&s, &config, &Forced, stream_velocity, |_| Point::zeros()).unwrap();
    for (du, db) in &t.divergence {
        assert!(du.passes(1e-10) && db.passes(1e-10), "{du:?} {db:?}");
    }
}

#[test]
fn condensed_and_direct_solves_agree() {
    for (n, k, convection) in [(2, 0, false), (3, 1, true)] {
        let s = space(n, k);
        let layout = DofLayout::new(&s);
        let mut config = SolverConfig::new(k, 1.0, 1.0);
        config.convection = convection;
        config.num_steps = Some(2);
        config.cross_check = true;
        let t = run_simulation(&s, &config, &Forced, stream_velocity, stream_velocity).unwrap();
        for report in &t.newton {
            assert!(!report.cross_check.is_empty());
            assert!(report.cross_check.iter().all(|&d| d <= 1e-10), "{:?}", report.cross_check);
            let stats = report.condensation.unwrap();
            assert_eq!(stats.full_dim, layout.total);
            assert_eq!(stats.condensed_dim, layout.condensed_dim());
            let faces = s.num_faces() * 2 * (layout.face_vector + layout.face_scalar);
            assert_eq!(stats.condensed_dim, faces + 2);
            assert!(stats.condensed_dim < stats.full_dim);
        }
    }
}

#[test]
fn sparse_solve_with_dense_rows_matches_dense_lu() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 400;
    let mut a = SparseMatrix::new(n);
    for i in 0..n - 2 {
        a.push(i, i, 4.0 + rng.gen_range(0.0..1.0));
        if i + 1 < n - 2 {
            a.push(i, i + 1, rng.gen_range(-1.0..1.0));
            a.push(i + 1, i, rng.gen_range(-1.0..1.0));
        }
    }
    for d in [n - 2, n - 1] {
        for j in 0..n - 2 {
            a.push(d, j, rng.gen_range(0.5..1.0) / n as f64);
            a.push(j, d, rng.gen_range(0.5..1.0) / n as f64);
        }
    }
    a.push(n - 2, n - 1, 0.3);
    a.push(n - 1, n - 2, -0.2);
    let rhs = random_vector(n, &mut rng);
    let x = a.solve(&rhs).unwrap();
    let dense: DMatrix<f64> = a.to_dense();
    let reference = dense.clone().lu().solve(&rhs).unwrap();
    assert!((&x - &reference).norm() <= 1e-10 * reference.norm());
    assert!((dense * &x - &rhs).norm() <= 1e-11 * rhs.norm());
}

#[test]
fn energy_of_the_forced_solution_is_stable_under_refinement() {
    let zero = |_: f64, _: &Point| Point::zeros();
    let energies: Vec<f64> = [8, 16, 32]
        .iter()
        .map(|&n| {
            let s = space(n, 0);
            let config = SolverConfig::new(0, 1.0, 1.0);
            let t = run_simulation(&s, &config, &Forced, stream_velocity, |p| stream_velocity(p) * -0.5).unwrap();
            energy_error(&s, &t, &zero, &zero, &config).unwrap().components_sum()
        })
        .collect();
    for e in &energies {
        assert!(e.is_finite() && *e > 0.0);
        assert!((e / energies[0] - 1.0).abs() < 0.1, "{energies:?}");
    }
}

#[test]
fn pressures_have_zero_mean() {
    let s = space(4, 1);
    let mut config = SolverConfig::new(1, 1.0, 1.0);
    config.num_steps = Some(2);
    let t = run_simulation(&s, &config, &Forced, stream_velocity, stream_velocity).unwrap();
    for state in &t.states {
        let fields: [&HybridScalarField; 2] = [&state.p, &state.r];
        for q in fields {
            assert!(s.scalar_integral(q).abs() < 1e-12);
        }
    }
}
