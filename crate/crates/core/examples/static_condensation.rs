//! Runs a few manufactured time steps solving every Newton system both with
//! and without static condensation and prints the system sizes and the
//! discrepancy between the two solutions.
//!
//! `cargo run --release --example static_condensation -- 4`

use mhd_hho::hybrid::HybridSpace;
use mhd_hho::mesh::generate_structured_mesh;
use mhd_hho::mms::ManufacturedProblem;
use mhd_hho::solver::{run_simulation, SolverConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(4);
    let space = HybridSpace::new(&generate_structured_mesh(n), 0)?;
    let mut config = SolverConfig::new(0, 1.0, 1.0);
    config.cross_check = true;
    config.num_steps = Some(3);
    let problem = ManufacturedProblem::new(config.nu, config.mu);
    let trajectory = run_simulation(&space, &config, &problem, |p| problem.u(0.0, p), |p| problem.b(0.0, p))?;

    for (step, report) in trajectory.newton.iter().enumerate() {
        let stats = report.condensation.expect("condensed solve");
        println!(
            "step {step}: {} Newton iterations, {} -> {} unknowns, discrepancies {:?}",
            report.iterations,
            stats.full_dim,
            stats.condensed_dim,
            report.cross_check.iter().map(|d| format!("{d:.1e}")).collect::<Vec<_>>()
        );
    }
    Ok(())
}
