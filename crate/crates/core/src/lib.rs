//! Topology optimization with moving morphable components and a two-mesh
//! finite element analysis: geometry lives on a fine background grid while
//! displacements are interpolated on coarse hyper-elements.

pub mod driver;
pub mod error;
pub mod fea;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod mesh;
pub mod optimizer;
pub mod sensitivity;

pub use error::{Error, Result};
pub use driver::{Design, ProblemDef, RunResult, RunSettings};
pub use fea::{LoadCase, MaterialSpec, SolverSettings};
pub use geometry::{Component, Component2D, Component3D, RegularizationParams};
pub use io::RunConfig;
pub use mesh::{Grid, HyperMesh};
