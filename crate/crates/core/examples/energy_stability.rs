//! Evolves divergence-free initial data without forcing and prints the
//! discrete kinetic plus magnetic energy at every time level.
//!
//! `cargo run --release --example energy_stability -- 1e-3`

use std::f64::consts::PI;

use mhd_hho::hybrid::{norm_0h, HybridSpace};
use mhd_hho::mesh::generate_structured_mesh;
use mhd_hho::solver::{run_simulation, SolverConfig, Unforced};
use mhd_hho::Point;

fn stream_velocity(p: &Point) -> Point {
    let (sx, cx) = ((PI * p.x).sin(), (PI * p.x).cos());
    let (sy, cy) = ((PI * p.y).sin(), (PI * p.y).cos());
    Point::new(2.0 * PI * sx * sx * sy * cy, -2.0 * PI * sx * cx * sy * sy)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let viscosity: f64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(1e-3);
    let space = HybridSpace::new(&generate_structured_mesh(8), 0)?;
    let config = SolverConfig::new(0, viscosity, viscosity);
    let trajectory = run_simulation(&space, &config, &Unforced, stream_velocity, |p| -0.5 * stream_velocity(p))?;

    println!("ν = µ = {viscosity}, Δt = {:.4}", trajectory.dt);
    let mut previous = f64::INFINITY;
    for (state, step) in trajectory.states.iter().zip(std::iter::once(None).chain(trajectory.newton.iter().map(Some))) {
        let energy = norm_0h(&space, &state.u)?.powi(2) + norm_0h(&space, &state.b)?.powi(2);
        let iterations = step.map(|r| r.iterations.to_string()).unwrap_or_default();
        let marker = if energy > previous { "  increased" } else { "" };
        println!("t={:.4}  energy={energy:.10e}  newton {iterations}{marker}", state.time);
        previous = energy;
    }
    Ok(())
}
