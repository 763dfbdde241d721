use super::quadrature::Entity;
use crate::mesh::{Geometry, Mesh};
use crate::Point;

/// A face seen from an element: canonical endpoints plus the outward normal.
#[derive(Debug, Clone)]
pub struct CellFace {
    pub start: Point,
    pub end: Point,
    pub length: f64,
    pub normal: Point,
    /// Distance from the element centroid to the line containing the face.
    pub distance: f64,
}

impl CellFace {
    pub fn entity(&self) -> Entity {
        Entity::Segment([self.start, self.end])
    }
}

/// Geometry of a single triangle as needed by the local polynomial spaces.
#[derive(Debug, Clone)]
pub struct Cell {
    pub vertices: [Point; 3],
    pub centroid: Point,
    pub diameter: f64,
    pub area: f64,
    pub faces: [CellFace; 3],
}

impl Cell {
    pub fn from_mesh(mesh: &Mesh, geometry: &Geometry, e: usize) -> Self {
        let g = geometry.element(e);
        let faces = [0, 1, 2].map(|i| {
            let fg = geometry.face(mesh.element_faces(e)[i].face);
            CellFace {
                start: fg.start,
                end: fg.end,
                length: fg.length,
                normal: g.normals[i],
                distance: g.face_distances[i],
            }
        });
        Self {
            vertices: g.vertices,
            centroid: g.centroid,
            diameter: g.diameter,
            area: g.area,
            faces,
        }
    }

    /// Standalone cell for a counter-clockwise triangle.
    pub fn from_vertices(vertices: [Point; 3]) -> Self {
        let mesh = Mesh::new(vertices.to_vec(), vec![[0, 1, 2]]).expect("valid triangle");
        let geometry = crate::mesh::compute_geometry(&mesh).expect("non-degenerate triangle");
        Self::from_mesh(&mesh, &geometry, 0)
    }

    pub fn entity(&self) -> Entity {
        Entity::Triangle(self.vertices)
    }
}
