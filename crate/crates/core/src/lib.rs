//! Hybrid high-order discretization of the unsteady incompressible MHD
//! equations in two space dimensions.
//!
//! Velocity and magnetic field live in a hybrid space made of
//! Raviart–Thomas–Nédélec polynomials inside elements and vector
//! polynomials on faces. Mass conservation and Gauss's law are enforced
//! through a discrete gradient coupling, so every computed field is
//! pointwise divergence-free with continuous normal traces.
//!
//! The crate is organised bottom-up:
//!
//! * [`mesh`]: simplicial meshes of 2D domains and their geometry.
//! * [`polyspace`]: quadrature, orthonormal bases, L2 projectors, RTN spaces.
//! * [`hybrid`]: hybrid fields, interpolators, local operators and forms.
//! * [`solver`]: global assembly, Crank–Nicolson/Newton time stepping,
//!   static condensation.
//! * [`mms`]: manufactured solutions, energy-norm errors, convergence rates,
//!   inf-sup and Péclet diagnostics.
//! * [`cli`]: convergence-study driver used by the `mhd-hho` binary.

pub mod cli;
pub mod error;
pub mod hybrid;
pub mod mesh;
pub mod mms;
pub mod polyspace;
pub mod solver;

pub use error::{Error, Result};

/// Points and vectors in the plane.
pub type Point = nalgebra::Vector2<f64>;
