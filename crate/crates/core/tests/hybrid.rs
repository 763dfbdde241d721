use std::f64::consts::PI;

use mhd_hho::hybrid::*;
use mhd_hho::mesh::{generate_structured_mesh, Mesh};
use mhd_hho::polyspace::quadrature_rule;
use mhd_hho::Point;
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn space(n: usize, k: usize) -> HybridSpace {
    HybridSpace::new(&generate_structured_mesh(n), k).unwrap()
}

fn perturbed_mesh(n: usize, seed: u64) -> Mesh {
    let base = generate_structured_mesh(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1.0 / n as f64;
    let vertices = base
        .vertices()
        .iter()
        .map(|v| {
            let interior = v.x > 1e-12 && v.x < 1.0 - 1e-12 && v.y > 1e-12 && v.y < 1.0 - 1e-12;
            if interior {
                v + Point::new(rng.gen_range(-0.2..0.2) * h, rng.gen_range(-0.2..0.2) * h)
            } else {
                *v
            }
        })
        .collect();
    Mesh::new(vertices, base.elements().to_vec()).unwrap()
}

/// Divergence-free field vanishing on the boundary of the unit square,
/// derived from the stream function sin²(πx) sin²(πy).
fn stream_velocity(p: &Point) -> Point {
    let (sx, cx) = ((PI * p.x).sin(), (PI * p.x).cos());
    let (sy, cy) = ((PI * p.y).sin(), (PI * p.y).cos());
    Point::new(2.0 * PI * sx * sx * sy * cy, -2.0 * PI * sx * cx * sy * sy)
}

fn random_field(space: &HybridSpace, rng: &mut ChaCha8Rng, homogeneous: bool) -> HybridVectorField {
    let n = HybridVectorField::zeros(space, false).len();
    let data = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
    let mut v = HybridVectorField::from_vector(space, data, false).unwrap();
    if homogeneous {
        v.apply_homogeneous_bc(space);
    }
    v
}

/// Vector polynomial of total degree `degree` (at most 3).
fn poly_field(c: &[f64; 12], degree: usize) -> impl Fn(&Point) -> Point + '_ {
    move |p: &Point| {
        let (x, y) = (p.x, p.y);
        let mut v = Point::new(c[0] + c[1] * x + c[2] * y, c[3] + c[4] * x + c[5] * y);
        if degree >= 2 {
            v += Point::new(c[6] * x * x + c[7] * x * y, c[8] * y * y + c[9] * x * y);
        }
        if degree >= 3 {
            v += Point::new(c[10] * x * x * y, c[11] * y * y * y);
        }
        v
    }
}

#[test]
fn interpolating_zero_and_constants() {
    let s = space(2, 0);
    let z = s.interpolate_velocity(|_| Point::zeros(), false).unwrap();
    assert!(z.as_vector().iter().all(|x| *x == 0.0));
    let c = s.interpolate_velocity(|_| Point::new(1.0, 2.0), false).unwrap();
    for e in 0..s.num_elements() {
        let cell = &s.local(e).cell;
        assert!((s.element_value(&c, e, &cell.centroid) - Point::new(1.0, 2.0)).norm() < 1e-12);
    }
    for f in 0..s.num_faces() {
        let g = s.geometry().face(f);
        assert!((s.face_value(&c, f, &g.midpoint) - Point::new(1.0, 2.0)).norm() < 1e-12);
    }
}

#[test]
fn reconstruction_reproduces_polynomials_of_degree_k_plus_one() {
    let coeffs = [0.3, -1.2, 0.7, 2.0, 0.4, -0.9, 1.1, -0.6, 0.8, 0.5, -0.7, 0.2];
    for k in 0..=2 {
        let s = HybridSpace::new(&perturbed_mesh(3, 5), k).unwrap();
        let w = poly_field(&coeffs, k + 1);
        let v = s.interpolate_velocity(&w, false).unwrap();
        for e in 0..s.num_elements() {
            let l = s.local(e);
            let local = s.local_vector(&v, e);
            let rec = &l.reconstruction * &local;
            let nr = l.recon_basis.dim();
            for p in l.cell.vertices.iter().chain([l.cell.centroid].iter()) {
                let psi = l.recon_basis.values(p);
                let value = Point::new(psi.dot(&rec.rows(0, nr)), psi.dot(&rec.rows(nr, nr)));
                assert!((value - w(p)).norm() < 1e-11, "k={k} e={e}: {value} vs {}", w(p));
            }
            let s_val = local.dot(&(&l.stabilization * &local));
            assert!(s_val.abs() < 1e-11, "k={k} e={e}: s_T = {s_val}");
        }
    }
}

#[test]
fn reconstruction_mean_for_lowest_order_uses_faces_only() {
    let s = space(2, 0);
    let w = |p: &Point| Point::new(p.x, 0.0);
    let mut v = s.interpolate_velocity(w, false).unwrap();
    for e in 0..s.num_elements() {
        v.element_block_mut(e).fill(3.7);
    }
    for e in 0..s.num_elements() {
        let l = s.local(e);
        let rec = &l.reconstruction * s.local_vector(&v, e);
        let nr = l.recon_basis.dim();
        let rule = quadrature_rule(l.cell.entity(), 4).unwrap();
        let mean = rule.integrate(|p| l.recon_basis.values(p).dot(&rec.rows(0, nr)));
        let mut expected = 0.0;
        for face in &l.cell.faces {
            let fr = quadrature_rule(face.entity(), 2).unwrap();
            expected += face.distance / 2.0 * fr.integrate(|p| p.x);
        }
        assert!((mean - expected).abs() < 1e-13, "e={e}: {mean} vs {expected}");
    }
}

#[test]
fn diffusion_vanishes_on_constants_and_is_symmetric() {
    for k in 0..=2 {
        let s = space(2, k);
        let c = s.interpolate_velocity(|_| Point::new(-0.4, 1.3), false).unwrap();
        for e in 0..s.num_elements() {
            let l = s.local(e);
            let local = s.local_vector(&c, e);
            assert!(local.dot(&(&l.diffusion * &local)).abs() < 1e-12);
            assert!((&l.diffusion - l.diffusion.transpose()).norm() < 1e-11 * l.diffusion.norm());
            assert!((&l.mass0 - l.mass0.transpose()).norm() < 1e-12 * l.mass0.norm());
            let eig = l.diffusion.clone().symmetric_eigen();
            assert!(eig.eigenvalues.min() > -1e-10);
        }
        assert!(norm_1h(&s, &c).unwrap() < 1e-12);
        assert!(norm_1infty_h(&s, &c).unwrap() < 1e-11);
    }
}

#[test]
fn inner_product_of_unit_constant_is_the_area() {
    let s = space(4, 1);
    let c = s.interpolate_velocity(|_| Point::new(1.0, 0.0), false).unwrap();
    assert!((inner_product_0h(&s, &c, &c).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn inner_product_dominates_the_l2_norm_and_is_bilinear() {
    let s = space(3, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = random_field(&s, &mut rng, false);
    let b = random_field(&s, &mut rng, false);
    let c = random_field(&s, &mut rng, false);
    let mut l2 = 0.0;
    for e in 0..s.num_elements() {
        let l = s.local(e);
        let rule = quadrature_rule(l.cell.entity(), 6).unwrap();
        l2 += rule.integrate(|p| s.element_value(&a, e, p).norm_squared());
    }
    assert!(inner_product_0h(&s, &a, &a).unwrap() >= l2 - 1e-12);
    let mut ac = a.clone();
    ac.axpy(1.0, &c).unwrap();
    let lhs = inner_product_0h(&s, &ac, &b).unwrap();
    let rhs = inner_product_0h(&s, &a, &b).unwrap() + inner_product_0h(&s, &c, &b).unwrap();
    assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
}

#[test]
fn norm_1h_of_a_single_face_block_matches_quadrature() {
    let s = space(2, 1);
    let f = (0..s.num_faces()).find(|&f| !s.mesh().is_boundary(f)).unwrap();
    let mut v = HybridVectorField::zeros(&s, false);
    v.face_block_mut(f).copy_from(&DVector::from_vec(vec![0.5, -0.2, 1.0, 0.3]));
    let (e1, e2) = s.mesh().face_elements(f);
    let g = s.geometry().face(f);
    let rule = quadrature_rule(mhd_hho::polyspace::Entity::Segment([g.start, g.end]), 4).unwrap();
    let face_l2 = rule.integrate(|p| s.face_value(&v, f, p).norm_squared());
    let expected = face_l2 / s.geometry().element(e1).diameter + face_l2 / s.geometry().element(e2.unwrap()).diameter;
    assert!((norm_1h(&s, &v).unwrap().powi(2) - expected).abs() < 1e-12);
}

#[test]
fn norm_1infty_of_a_linear_field() {
    let s1 = space(2, 1);
    let w = s1.interpolate_velocity(|p| Point::new(p.x, 0.0), false).unwrap();
    assert!((norm_1infty_h(&s1, &w).unwrap() - 1.0).abs() < 1e-11);
}

#[test]
fn pressure_gradient_properties() {
    for k in 0..=2 {
        let s = space(2, k);
        let one = s.interpolate_pressure(|_| 1.0, false).unwrap();
        let x = s.interpolate_pressure(|p| p.x, false).unwrap();
        for e in 0..s.num_elements() {
            let l = s.local(e);
            let g1 = &l.gradient * s.local_scalar(&one, e);
            assert!(g1.norm() < 1e-12);
            let gx = &l.gradient * s.local_scalar(&x, e);
            let val = l.rtn.evaluate(&gx, &l.cell.centroid);
            assert!((val - Point::new(1.0, 0.0)).norm() < 1e-12, "k={k}: {val}");
        }
    }
}

#[test]
fn divergence_coupling_of_linear_field() {
    let s = space(4, 0);
    let v = s.interpolate_velocity(|p| *p, false).unwrap();
    let q = s.interpolate_pressure(|_| 1.0, false).unwrap();
    // constants are annihilated by the discrete gradient: B_h(v, 1) = Σ_T ∫_T v_T·0
    assert!(divergence_coupling(&s, &v, &q).unwrap().abs() < 1e-12);
    let mut qt = q.clone();
    for f in 0..s.num_faces() {
        qt.face_block_mut(f).fill(0.0);
    }
    // with vanishing face values B_h(v, q) = -∫ q div v = -2
    assert!((divergence_coupling(&s, &v, &qt).unwrap() + 2.0).abs() < 1e-12);
}

#[test]
fn interpolates_of_divergence_free_fields_are_solenoidal() {
    for k in 0..=2 {
        let s = space(4, k);
        let v = s.interpolate_velocity(stream_velocity, true).unwrap();
        let report = check_divergence_free(&s, &v).unwrap();
        assert!(report.passes(1e-10), "k={k}: {report:?}");
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let n = HybridScalarField::zeros(&s, true).len();
            let q = HybridScalarField::from_vector(&s, DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0)), false).unwrap();
            assert!(divergence_coupling(&s, &v, &q).unwrap().abs() < 1e-11);
        }
        let lin = s.interpolate_velocity(|p| Point::new(p.x, 0.0), false).unwrap();
        let r = check_divergence_free(&s, &lin).unwrap();
        assert!((r.max_divergence - 1.0).abs() < 1e-10);
    }
}

#[test]
fn manufactured_velocity_interpolate_is_solenoidal() {
    let u = |p: &Point| {
        let (a, b) = (2.0 * PI * p.x, 2.0 * PI * p.y);
        -Point::new(a.sin() * b.sin(), a.cos() * b.cos())
    };
    for k in 0..=1 {
        let s = space(4, k);
        let v = s.interpolate_velocity(u, false).unwrap();
        let r = check_divergence_free(&s, &v).unwrap();
        assert!(r.passes(1e-10), "k={k}: {r:?}");
    }
}

#[test]
fn trilinear_form_is_non_dissipative_and_skew() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for k in 0..=1 {
        let s = HybridSpace::new(&perturbed_mesh(3, 11), k).unwrap();
        let w = s.interpolate_velocity(stream_velocity, true).unwrap();
        for _ in 0..10 {
            let v = random_field(&s, &mut rng, true);
            let z = random_field(&s, &mut rng, true);
            let scale = norm_0h(&s, &w).unwrap() * norm_1infty_h(&s, &v).unwrap() * norm_0h(&s, &v).unwrap();
            assert!(trilinear_form(&s, &w, &v, &v).unwrap().abs() < 1e-11 * scale);
            let a = trilinear_form(&s, &w, &v, &z).unwrap();
            let b = trilinear_form(&s, &w, &z, &v).unwrap();
            assert!((a + b).abs() < 1e-11 * scale.max(a.abs()));
        }
    }
}

#[test]
fn upwind_form_properties() {
    let s = space(3, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let poly = s.interpolate_velocity(|p| Point::new(p.x - 2.0 * p.y, 1.0 - p.y), false).unwrap();
    let z = random_field(&s, &mut rng, false);
    let alpha = vec![0.7; s.num_elements()];
    assert!(upwind_form(&s, &alpha, &poly, &z).unwrap().abs() < 1e-12);
    let v = random_field(&s, &mut rng, false);
    let j1 = upwind_form(&s, &alpha, &v, &z).unwrap();
    let double: Vec<f64> = alpha.iter().map(|a| 2.0 * a).collect();
    let j2 = upwind_form(&s, &double, &v, &z).unwrap();
    assert!((j2 - 2.0 * j1).abs() < 1e-12 * j1.abs().max(1.0));
    assert!(upwind_seminorm(&s, &alpha, &v).unwrap() > 0.0);
}

#[test]
fn zero_mean_pressure_interpolation() {
    let s = space(4, 1);
    let q = s.interpolate_pressure(|p| p.x, true).unwrap();
    assert!(s.scalar_integral(&q).abs() < 1e-13);
    let g = s.interpolate_pressure(|p| 2.0 * p.x - p.y, false).unwrap();
    for f in 0..s.num_faces() {
        let (e, _) = s.mesh().face_elements(f);
        let geom = s.geometry().face(f);
        let l = s.local(e);
        let trace = l.scalar.evaluate(&g.element_block(e).into_owned(), &geom.midpoint);
        let face = s.face_basis(f).evaluate(&g.face_block(f).into_owned(), &geom.midpoint);
        assert!((trace - face).abs() < 1e-12);
    }
}

/// Divergence-free field `curl(sin²(πx) sin²(πy) (a + bx + cy))`, vanishing on the boundary.
fn weighted_stream_velocity(a: f64, b: f64, c: f64) -> impl Fn(&Point) -> Point {
    move |p: &Point| {
        let (sx, cx) = ((PI * p.x).sin(), (PI * p.x).cos());
        let (sy, cy) = ((PI * p.y).sin(), (PI * p.y).cos());
        let s = sx * sx * sy * sy;
        let g = a + b * p.x + c * p.y;
        let psi_x = 2.0 * PI * sx * cx * sy * sy * g + s * b;
        let psi_y = 2.0 * PI * sx * sx * sy * cy * g + s * c;
        Point::new(psi_y, -psi_x)
    }
}

/// Extreme generalized eigenvalues of `a_T` against `‖·‖²_{1,T}` over all
/// elements, on the complement of the common kernel (lifted constants).
fn local_equivalence_constants(s: &HybridSpace) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for l in s.locals() {
        let eig = l.norm1.clone().symmetric_eigen();
        let top = eig.eigenvalues.max();
        let keep: Vec<usize> = (0..eig.eigenvalues.len()).filter(|&i| eig.eigenvalues[i] > 1e-10 * top).collect();
        assert_eq!(keep.len(), l.norm1.nrows() - 2);
        let q = eig.eigenvectors.select_columns(&keep);
        let scale = nalgebra::DMatrix::from_diagonal(&DVector::from_iterator(
            keep.len(),
            keep.iter().map(|&i| eig.eigenvalues[i].sqrt().recip()),
        ));
        let reduced = &scale * q.transpose() * &l.diffusion * &q * &scale;
        let ev = reduced.symmetric_eigen().eigenvalues;
        lo = lo.min(ev.min());
        hi = hi.max(ev.max());
    }
    (lo, hi)
}

#[test]
fn diffusion_is_equivalent_to_the_discrete_h1_norm_uniformly_in_h() {
    for k in 0..=1 {
        let constants: Vec<(f64, f64)> = [2, 4, 8, 16].iter().map(|&n| local_equivalence_constants(&space(n, k))).collect();
        let (lo0, hi0) = constants[0];
        assert!(lo0 > 0.0);
        for &(lo, hi) in &constants {
            assert!((lo / lo0 - 1.0).abs() < 0.1, "k={k}: {constants:?}");
            assert!((hi / hi0 - 1.0).abs() < 0.1, "k={k}: {constants:?}");
        }
    }
}

/// Dual norms, over `U^k_{h,0}`, of the diffusive consistency error (against
/// `‖·‖_{1,h}`) and of the time consistency error (against `‖·‖_{0,h}`) for
/// the manufactured velocity at `t = 0`.
fn consistency_dual_norms(n: usize, k: usize) -> (f64, f64, f64) {
    use mhd_hho::mms::exact_solution_2d;
    use mhd_hho::polyspace::default_quadrature_degree;
    use mhd_hho::solver::SparseMatrix;

    let s = space(n, k);
    let sizes = s.sizes();
    let ne = s.num_elements();
    let dim = ne * sizes.rtn + s.num_faces() * sizes.face_vector;
    let fixed = |i: usize| i >= ne * sizes.rtn && s.mesh().is_boundary((i - ne * sizes.rtn) / sizes.face_vector);
    let ex = |p: &Point| exact_solution_2d(0.0, p.x, p.y);
    let iu = s.interpolate_velocity(|p| ex(p).u, false).unwrap();
    let idt = s.interpolate_velocity(|p| ex(p).dt_u, false).unwrap();

    let mut diff = DVector::zeros(dim);
    let mut time = DVector::zeros(dim);
    let mut g1 = SparseMatrix::new(dim);
    let mut g0 = SparseMatrix::new(dim);
    for e in 0..ne {
        let l = s.local(e);
        let dofs = s.vector_dofs(e);
        let a_iu = &l.diffusion * s.local_vector(&iu, e);
        let m_idt = &l.mass0 * s.local_vector(&idt, e);
        let rule = quadrature_rule(l.cell.entity(), default_quadrature_degree(k)).unwrap();
        let mut lap = DVector::zeros(sizes.rtn);
        let mut dt = DVector::zeros(sizes.rtn);
        for (p, w) in rule.iter() {
            let v = ex(p);
            for (a, phi) in l.rtn.basis().values(p).iter().enumerate() {
                lap[a] += w * v.laplacian_u.dot(phi);
                dt[a] += w * v.dt_u.dot(phi);
            }
        }
        for (i, &gi) in dofs.iter().enumerate() {
            diff[gi] += a_iu[i] + if i < sizes.rtn { lap[i] } else { 0.0 };
            time[gi] += m_idt[i] - if i < sizes.rtn { dt[i] } else { 0.0 };
            for (j, &gj) in dofs.iter().enumerate() {
                if !fixed(gi) && !fixed(gj) {
                    g1.push(gi, gj, l.norm1[(i, j)]);
                    g0.push(gi, gj, l.mass0[(i, j)]);
                }
            }
        }
    }
    for i in (0..dim).filter(|&i| fixed(i)) {
        diff[i] = 0.0;
        time[i] = 0.0;
        g1.push(i, i, 1.0);
        g0.push(i, i, 1.0);
    }
    let d = diff.dot(&g1.solve(&diff).unwrap()).sqrt();
    let t = time.dot(&g0.solve(&time).unwrap()).sqrt();
    (s.geometry().h, d, t)
}

#[test]
fn consistency_errors_decay_at_order_k_plus_one() {
    for k in 0..=1 {
        let sweep: Vec<(f64, f64, f64)> = [8, 16, 32].iter().map(|&n| consistency_dual_norms(n, k)).collect();
        for w in sweep.windows(2) {
            let ratio = (w[0].0 / w[1].0).ln();
            let diff_rate = (w[0].1 / w[1].1).ln() / ratio;
            let time_rate = (w[0].2 / w[1].2).ln() / ratio;
            let expected = k as f64 + 1.0;
            assert!((diff_rate - expected).abs() <= 0.15, "k={k}: diffusive rates from {sweep:?}");
            assert!((time_rate - expected).abs() <= 0.15, "k={k}: time rates from {sweep:?}");
        }
    }
}

proptest::proptest! {
    #![proptest_config(proptest::prelude::ProptestConfig::with_cases(16))]

    #[test]
    fn stabilization_vanishes_on_interpolated_polynomials(
        k in 0usize..=2,
        seed in 0u64..1000,
        c in proptest::array::uniform12(-2.0f64..2.0),
    ) {
        let s = HybridSpace::new(&perturbed_mesh(3, seed), k).unwrap();
        let v = s.interpolate_velocity(poly_field(&c, k + 1), false).unwrap();
        for e in 0..s.num_elements() {
            let l = s.local(e);
            let local = s.local_vector(&v, e);
            let scale = local.dot(&(&l.norm1 * &local)).max(1.0);
            let value = local.dot(&(&l.stabilization * &local));
            proptest::prop_assert!(value.abs() <= 1e-11 * scale, "k={} e={}: {}", k, e, value);
        }
    }

    #[test]
    fn convection_is_skew_for_solenoidal_advection(
        k in 0usize..=1,
        seed in 0u64..1000,
        (a, b, c) in (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0),
    ) {
        let s = HybridSpace::new(&perturbed_mesh(4, seed), k).unwrap();
        let w = s.interpolate_velocity(weighted_stream_velocity(a + 1.5, b, c), true).unwrap();
        proptest::prop_assert!(check_divergence_free(&s, &w).unwrap().passes(1e-10));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..7 {
            let v = random_field(&s, &mut rng, true);
            let z = random_field(&s, &mut rng, true);
            let scale = norm_0h(&s, &w).unwrap() * norm_1infty_h(&s, &v).unwrap() * norm_0h(&s, &z).unwrap();
            let vv = trilinear_form(&s, &w, &v, &v).unwrap();
            proptest::prop_assert!(vv.abs() <= 1e-11 * scale, "t(w,v,v) = {}", vv);
            let vz = trilinear_form(&s, &w, &v, &z).unwrap();
            let zv = trilinear_form(&s, &w, &z, &v).unwrap();
            proptest::prop_assert!((vz + zv).abs() <= 1e-11 * scale, "{} vs {}", vz, zv);
        }
    }
}
