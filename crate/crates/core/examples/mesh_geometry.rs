//! Builds a structured mesh of the unit square, writes it in the text format
//! and reads it back, then prints geometric statistics.
//!
//! `cargo run --example mesh_geometry -- 8`

use mhd_hho::mesh::{compute_geometry, generate_structured_mesh, load_mesh};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(4);
    let mesh = generate_structured_mesh(n);
    let reloaded = load_mesh(&mesh.to_text())?;
    let geometry = compute_geometry(&reloaded)?;

    let boundary = reloaded.boundary_flags().iter().filter(|&&b| b).count();
    let area: f64 = geometry.elements.iter().map(|e| e.area).sum();
    println!("n = {n}");
    println!("vertices {}, elements {}, faces {} ({boundary} on the boundary)",
        reloaded.num_vertices(), reloaded.num_elements(), reloaded.num_faces());
    println!("total area {area:.15}");
    println!("h = {:.6e}, regularity (diameter / inradius) = {:.4}", geometry.h, geometry.regularity);

    let e = &geometry.elements[0];
    println!("element 0: vertices {:?}", e.vertices.map(|v| (v.x, v.y)));
    for (i, nrm) in e.normals.iter().enumerate() {
        println!("  face {i}: outward normal ({:+.4}, {:+.4}), centroid distance {:.4}", nrm.x, nrm.y, e.face_distances[i]);
    }
    Ok(())
}
