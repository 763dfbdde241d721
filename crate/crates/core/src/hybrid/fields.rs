use nalgebra::{DVector, DVectorView, DVectorViewMut};

use super::HybridSpace;
use crate::{Error, Result};

/// Element of `U^k_h`, stored as all element blocks followed by all face blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridVectorField {
    k: usize,
    num_elements: usize,
    element_size: usize,
    face_size: usize,
    data: DVector<f64>,
    homogeneous_bc: bool,
}

/// Element of `P^k_h`, stored as all element blocks followed by all face blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridScalarField {
    k: usize,
    num_elements: usize,
    element_size: usize,
    face_size: usize,
    data: DVector<f64>,
    zero_mean: bool,
}

macro_rules! block_storage {
    ($ty:ident, $flag:ident) => {
        impl $ty {
            pub fn degree(&self) -> usize {
                self.k
            }

            pub fn $flag(&self) -> bool {
                self.$flag
            }

            pub fn len(&self) -> usize {
                self.data.len()
            }

            pub fn is_empty(&self) -> bool {
                self.data.is_empty()
            }

            pub fn num_elements(&self) -> usize {
                self.num_elements
            }

            pub fn num_faces(&self) -> usize {
                (self.data.len() - self.num_elements * self.element_size) / self.face_size
            }

            pub fn element_block_size(&self) -> usize {
                self.element_size
            }

            pub fn face_block_size(&self) -> usize {
                self.face_size
            }

            pub fn element_block(&self, e: usize) -> DVectorView<'_, f64> {
                self.data.rows(e * self.element_size, self.element_size)
            }

            pub fn element_block_mut(&mut self, e: usize) -> DVectorViewMut<'_, f64> {
                self.data.rows_mut(e * self.element_size, self.element_size)
            }

            pub fn face_block(&self, f: usize) -> DVectorView<'_, f64> {
                let start = self.num_elements * self.element_size;
                self.data.rows(start + f * self.face_size, self.face_size)
            }

            pub fn face_block_mut(&mut self, f: usize) -> DVectorViewMut<'_, f64> {
                let start = self.num_elements * self.element_size;
                self.data.rows_mut(start + f * self.face_size, self.face_size)
            }

            /// All element blocks as one contiguous slice.
            pub fn element_part(&self) -> DVectorView<'_, f64> {
                self.data.rows(0, self.num_elements * self.element_size)
            }

            /// All face blocks as one contiguous slice.
            pub fn face_part(&self) -> DVectorView<'_, f64> {
                let start = self.num_elements * self.element_size;
                self.data.rows(start, self.data.len() - start)
            }

            pub fn as_vector(&self) -> &DVector<f64> {
                &self.data
            }

            pub fn as_vector_mut(&mut self) -> &mut DVector<f64> {
                &mut self.data
            }

            pub fn is_finite(&self) -> bool {
                self.data.iter().all(|x| x.is_finite())
            }

            /// `self + c * other`.
            pub fn axpy(&mut self, c: f64, other: &Self) -> Result<()> {
                if self.data.len() != other.data.len() || self.k != other.k {
                    return Err(Error::Mismatch("hybrid fields of different spaces".into()));
                }
                self.data.axpy(c, &other.data, 1.0);
                Ok(())
            }
        }
    };
}

block_storage!(HybridVectorField, homogeneous_bc);
block_storage!(HybridScalarField, zero_mean);

impl HybridVectorField {
    pub fn zeros(space: &HybridSpace, homogeneous_bc: bool) -> Self {
        let s = space.sizes();
        Self {
            k: s.k,
            num_elements: space.num_elements(),
            element_size: s.rtn,
            face_size: s.face_vector,
            data: DVector::zeros(space.num_elements() * s.rtn + space.num_faces() * s.face_vector),
            homogeneous_bc,
        }
    }

    /// Wraps a flat coefficient vector. With `homogeneous_bc` the boundary
    /// face blocks must vanish.
    pub fn from_vector(space: &HybridSpace, data: DVector<f64>, homogeneous_bc: bool) -> Result<Self> {
        let mut v = Self::zeros(space, homogeneous_bc);
        if data.len() != v.data.len() {
            return Err(Error::Mismatch(format!(
                "vector field needs {} coefficients, got {}",
                v.data.len(),
                data.len()
            )));
        }
        v.data = data;
        if homogeneous_bc {
            for f in 0..space.num_faces() {
                if space.mesh().is_boundary(f) && v.face_block(f).iter().any(|x| *x != 0.0) {
                    return Err(Error::Mismatch(format!("boundary face {f} carries nonzero values")));
                }
            }
        }
        Ok(v)
    }

    /// Sets every boundary face block to zero and marks the field as homogeneous.
    pub fn apply_homogeneous_bc(&mut self, space: &HybridSpace) {
        for f in 0..space.num_faces() {
            if space.mesh().is_boundary(f) {
                self.face_block_mut(f).fill(0.0);
            }
        }
        self.homogeneous_bc = true;
    }
}

impl HybridScalarField {
    pub fn zeros(space: &HybridSpace, zero_mean: bool) -> Self {
        let s = space.sizes();
        Self {
            k: s.k,
            num_elements: space.num_elements(),
            element_size: s.element_scalar,
            face_size: s.face_scalar,
            data: DVector::zeros(space.num_elements() * s.element_scalar + space.num_faces() * s.face_scalar),
            zero_mean,
        }
    }

    pub fn from_vector(space: &HybridSpace, data: DVector<f64>, zero_mean: bool) -> Result<Self> {
        let mut q = Self::zeros(space, zero_mean);
        if data.len() != q.data.len() {
            return Err(Error::Mismatch(format!(
                "scalar field needs {} coefficients, got {}",
                q.data.len(),
                data.len()
            )));
        }
        q.data = data;
        Ok(q)
    }
}
