//! Interpolates a smooth vector field into Raviart–Thomas–Nédélec spaces of
//! increasing order and reports the L2 error and its observed order.
//!
//! `cargo run --example rtn_interpolation`

use mhd_hho::mesh::{compute_geometry, generate_structured_mesh};
use mhd_hho::polyspace::{quadrature_rule, Cell, RtnBasis};
use mhd_hho::Point;

fn field(p: &Point) -> Point {
    Point::new((p.x + p.y).sin(), (p.x - p.y).cos())
}

fn l2_error(n: usize, order: usize) -> mhd_hho::Result<(f64, f64)> {
    let mesh = generate_structured_mesh(n);
    let geometry = compute_geometry(&mesh)?;
    let mut err = 0.0;
    for e in 0..mesh.num_elements() {
        let cell = Cell::from_mesh(&mesh, &geometry, e);
        let rtn = RtnBasis::new(&cell, order)?;
        let c = rtn.interpolate(field, 12)?;
        err += quadrature_rule(cell.entity(), 12)?.integrate(|p| (field(p) - rtn.evaluate(&c, p)).norm_squared());
    }
    Ok((geometry.h, err.sqrt()))
}

fn main() -> mhd_hho::Result<()> {
    for order in 1..=3 {
        println!("RTN{order}");
        let mut previous: Option<(f64, f64)> = None;
        for n in [4, 8, 16] {
            let (h, err) = l2_error(n, order)?;
            let rate = previous.map(|(h0, e0)| format!("{:.3}", (e0 / err).ln() / (h0 / h).ln())).unwrap_or_default();
            println!("  n={n:3}  h={h:.4e}  L2 error={err:.4e}  rate {rate}");
            previous = Some((h, err));
        }
    }
    Ok(())
}
