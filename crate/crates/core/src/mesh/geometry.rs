use super::{signed_area, Mesh};
use crate::{Error, Point, Result};

#[derive(Debug, Clone)]
pub struct FaceGeometry {
    pub start: Point,
    pub end: Point,
    pub length: f64,
    pub midpoint: Point,
    /// Unit normal obtained by rotating `end - start` clockwise.
    pub normal: Point,
}

impl FaceGeometry {
    pub fn diameter(&self) -> f64 {
        self.length
    }
}

#[derive(Debug, Clone)]
pub struct ElementGeometry {
    pub vertices: [Point; 3],
    pub area: f64,
    pub diameter: f64,
    pub centroid: Point,
    pub inradius: f64,
    /// Outward unit normal of each local face.
    pub normals: [Point; 3],
    /// Distance from the centroid to the line containing each local face.
    pub face_distances: [f64; 3],
}

/// Geometric quantities attached to a [`Mesh`].
#[derive(Debug, Clone)]
pub struct Geometry {
    pub elements: Vec<ElementGeometry>,
    pub faces: Vec<FaceGeometry>,
    /// Mesh size, the largest element diameter.
    pub h: f64,
    /// Largest ratio between element diameter and inradius.
    pub regularity: f64,
}

impl Geometry {
    pub fn element(&self, e: usize) -> &ElementGeometry {
        &self.elements[e]
    }

    pub fn face(&self, f: usize) -> &FaceGeometry {
        &self.faces[f]
    }
}

pub fn compute_geometry(mesh: &Mesh) -> Result<Geometry> {
    let faces: Vec<FaceGeometry> = (0..mesh.num_faces())
        .map(|f| {
            let [start, end] = mesh.face_vertices(f);
            let tangent = end - start;
            let length = tangent.norm();
            FaceGeometry {
                start,
                end,
                length,
                midpoint: 0.5 * (start + end),
                normal: Point::new(tangent.y, -tangent.x) / length,
            }
        })
        .collect();

    let mut elements = Vec::with_capacity(mesh.num_elements());
    for e in 0..mesh.num_elements() {
        let vertices = mesh.element_vertices(e);
        let [a, b, c] = vertices;
        let area = signed_area(&a, &b, &c);
        let edges = [(b - c).norm(), (c - a).norm(), (a - b).norm()];
        let diameter = edges.iter().cloned().fold(0.0, f64::max);
        if !(area > 1e-14 * diameter * diameter) {
            return Err(Error::DegenerateElement { element: e, area });
        }
        let centroid = (a + b + c) / 3.0;
        let perimeter: f64 = edges.iter().sum();
        let mut normals = [Point::zeros(); 3];
        let mut face_distances = [0.0; 3];
        for (i, ef) in mesh.element_faces(e).iter().enumerate() {
            let face = &faces[ef.face];
            normals[i] = ef.sign * face.normal;
            face_distances[i] = (face.start - centroid).dot(&normals[i]);
        }
        elements.push(ElementGeometry {
            vertices,
            area,
            diameter,
            centroid,
            inradius: 2.0 * area / perimeter,
            normals,
            face_distances,
        });
    }

    let h = elements.iter().map(|g| g.diameter).fold(0.0, f64::max);
    let regularity = elements
        .iter()
        .map(|g| g.diameter / g.inradius)
        .fold(0.0, f64::max);
    Ok(Geometry {
        elements,
        faces,
        h,
        regularity,
    })
}
