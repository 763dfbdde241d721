//! Runs the manufactured-solution convergence study and prints the CSV table
//! of mesh size, energy error and observed order.
//!
//! `cargo run --release --example convergence_study -- 0 1 1 4,8,16`
//! (arguments: k, ν, µ, structured mesh resolutions)

use mhd_hho::cli::{run_convergence_study, MeshSequence, StudyConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, default: &str| args.get(i).cloned().unwrap_or_else(|| default.to_string());
    let k: usize = arg(0, "0").parse()?;
    let nu: f64 = arg(1, "1").parse()?;
    let mu: f64 = arg(2, "1").parse()?;
    let meshes = arg(3, "4,8,16").split(',').map(str::parse).collect::<Result<Vec<usize>, _>>()?;

    let config = StudyConfig::new(k, nu, mu, MeshSequence::Structured(meshes));
    let rows = run_convergence_study(&config, &mut std::io::stdout())?;
    for row in &rows {
        eprintln!("h={:.4e}: {} unknowns, {:.1} s", row.report.h, row.report.dofs, row.report.wall_time);
    }
    Ok(())
}
