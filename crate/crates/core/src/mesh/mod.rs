//! Matching simplicial meshes of 2D polygonal domains.

mod geometry;
mod io;

pub use geometry::{compute_geometry, ElementGeometry, FaceGeometry, Geometry};
pub use io::load_mesh;

use std::collections::HashMap;

use crate::{Error, Point, Result};

/// A face as seen from one of its elements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementFace {
    pub face: usize,
    /// `+1` when the element traverses the face from its first to its second
    /// vertex, `-1` otherwise. The outward normal is `sign * face normal`.
    pub sign: f64,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Point>,
    elements: Vec<[usize; 3]>,
    faces: Vec<[usize; 2]>,
    element_faces: Vec<[ElementFace; 3]>,
    face_elements: Vec<(usize, Option<usize>)>,
}

impl Mesh {
    /// Builds a mesh from vertex coordinates and triangles.
    ///
    /// Clockwise triangles are reordered. Faces are derived from the element
    /// edges and canonicalized by sorted vertex indices.
    pub fn new(vertices: Vec<Point>, mut elements: Vec<[usize; 3]>) -> Result<Self> {
        for (e, tri) in elements.iter_mut().enumerate() {
            if let Some(&v) = tri.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::Topology(format!(
                    "element {e} references vertex {v} but only {} vertices exist",
                    vertices.len()
                )));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::Topology(format!("element {e} repeats a vertex")));
            }
            let area = signed_area(&vertices[tri[0]], &vertices[tri[1]], &vertices[tri[2]]);
            if area < 0.0 {
                tri.swap(1, 2);
            } else if area == 0.0 || !area.is_finite() {
                return Err(Error::Orientation { element: e });
            }
        }

        let mut face_index: HashMap<[usize; 2], usize> = HashMap::new();
        let mut faces = Vec::new();
        let mut face_elements: Vec<(usize, Option<usize>)> = Vec::new();
        let mut face_first_sign: Vec<f64> = Vec::new();
        let mut element_faces = Vec::with_capacity(elements.len());

        for (e, tri) in elements.iter().enumerate() {
            let mut local = [ElementFace { face: 0, sign: 1.0 }; 3];
            for (i, slot) in local.iter_mut().enumerate() {
                // local face i is opposite local vertex i
                let from = tri[(i + 1) % 3];
                let to = tri[(i + 2) % 3];
                let key = if from < to { [from, to] } else { [to, from] };
                let sign = if from < to { 1.0 } else { -1.0 };
                let f = match face_index.get(&key) {
                    Some(&f) => {
                        let (first, second) = face_elements[f];
                        if second.is_some() {
                            return Err(Error::Topology(format!(
                                "edge ({}, {}) belongs to more than two elements",
                                key[0], key[1]
                            )));
                        }
                        if face_first_sign[f] == sign {
                            return Err(Error::Topology(format!(
                                "elements {first} and {e} overlap along edge ({}, {})",
                                key[0], key[1]
                            )));
                        }
                        face_elements[f].1 = Some(e);
                        f
                    }
                    None => {
                        let f = faces.len();
                        faces.push(key);
                        face_elements.push((e, None));
                        face_first_sign.push(sign);
                        face_index.insert(key, f);
                        f
                    }
                };
                *slot = ElementFace { face: f, sign };
            }
            element_faces.push(local);
        }

        Ok(Self {
            vertices,
            elements,
            faces,
            element_faces,
            face_elements,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn elements(&self) -> &[[usize; 3]] {
        &self.elements
    }

    pub fn faces(&self) -> &[[usize; 2]] {
        &self.faces
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// The three faces of element `e`, local face `i` being opposite local vertex `i`.
    pub fn element_faces(&self, e: usize) -> &[ElementFace; 3] {
        &self.element_faces[e]
    }

    /// Elements sharing face `f`; the second is `None` on the boundary.
    pub fn face_elements(&self, f: usize) -> (usize, Option<usize>) {
        self.face_elements[f]
    }

    pub fn is_boundary(&self, f: usize) -> bool {
        self.face_elements[f].1.is_none()
    }

    pub fn boundary_flags(&self) -> Vec<bool> {
        (0..self.num_faces()).map(|f| self.is_boundary(f)).collect()
    }

    pub fn element_vertices(&self, e: usize) -> [Point; 3] {
        let [a, b, c] = self.elements[e];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn face_vertices(&self, f: usize) -> [Point; 2] {
        let [a, b] = self.faces[f];
        [self.vertices[a], self.vertices[b]]
    }

    /// Serializes the mesh in the line-oriented text format read by [`load_mesh`].
    pub fn to_text(&self) -> String {
        let mut out = String::from("meshdim 2\n");
        out.push_str(&format!("vertices {}\n", self.vertices.len()));
        for v in &self.vertices {
            out.push_str(&format!("{:.17e} {:.17e}\n", v.x, v.y));
        }
        out.push_str(&format!("elements {}\n", self.elements.len()));
        for [a, b, c] in &self.elements {
            out.push_str(&format!("{a} {b} {c}\n"));
        }
        out
    }
}

pub(crate) fn signed_area(a: &Point, b: &Point, c: &Point) -> f64 {
    0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y))
}

/// Uniform triangulation of the unit square: an `n x n` grid with every
/// cell cut along its lower-left to upper-right diagonal.
pub fn generate_structured_mesh(n: usize) -> Mesh {
    assert!(n >= 1, "structured mesh needs at least one cell per direction");
    let stride = n + 1;
    let mut vertices = Vec::with_capacity(stride * stride);
    for j in 0..=n {
        for i in 0..=n {
            vertices.push(Point::new(i as f64 / n as f64, j as f64 / n as f64));
        }
    }
    let mut elements = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let v00 = j * stride + i;
            let v10 = v00 + 1;
            let v01 = v00 + stride;
            let v11 = v01 + 1;
            elements.push([v00, v10, v11]);
            elements.push([v00, v11, v01]);
        }
    }
    Mesh::new(vertices, elements).expect("structured mesh is valid by construction")
}
