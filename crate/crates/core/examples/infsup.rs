//! Estimates the discrete inf-sup constant of the pressure coupling on a
//! sequence of meshes.
//!
//! `cargo run --release --example infsup`

use mhd_hho::mesh::generate_structured_mesh;
use mhd_hho::mms::estimate_infsup_constant;

fn main() -> mhd_hho::Result<()> {
    for k in 0..=1 {
        for n in [2, 4, 8] {
            let beta = estimate_infsup_constant(&generate_structured_mesh(n), k)?;
            println!("k={k} n={n:2}  inf-sup constant {beta:.6}");
        }
    }
    Ok(())
}
