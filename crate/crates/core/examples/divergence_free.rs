//! Interpolates a solenoidal field with homogeneous boundary values into the
//! hybrid velocity space and reports the pointwise divergence diagnostics,
//! alongside a field that is not divergence-free.
//!
//! `cargo run --example divergence_free -- 1`

use std::f64::consts::PI;

use mhd_hho::hybrid::{check_divergence_free, HybridSpace};
use mhd_hho::mesh::generate_structured_mesh;
use mhd_hho::Point;

fn stream_velocity(p: &Point) -> Point {
    let (sx, cx) = ((PI * p.x).sin(), (PI * p.x).cos());
    let (sy, cy) = ((PI * p.y).sin(), (PI * p.y).cos());
    Point::new(2.0 * PI * sx * sx * sy * cy, -2.0 * PI * sx * cx * sy * sy)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let k: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(0);
    let space = HybridSpace::new(&generate_structured_mesh(8), k)?;

    let solenoidal = space.interpolate_velocity(stream_velocity, true)?;
    let report = check_divergence_free(&space, &solenoidal)?;
    println!("curl of sin²(πx)sin²(πy), k={k}:");
    println!("  {report:#?}");
    println!("  relative {:.3e}, passes 1e-10: {}", report.max_relative(), report.passes(1e-10));

    let expanding = space.interpolate_velocity(|p| Point::new(p.x, p.y), false)?;
    let report = check_divergence_free(&space, &expanding)?;
    println!("(x, y), k={k}: max divergence {:.3}, passes 1e-10: {}", report.max_divergence, report.passes(1e-10));
    Ok(())
}
