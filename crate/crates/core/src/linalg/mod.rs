//! Sparse linear algebra: CSR storage, nested dissection, a supernodal
//! Cholesky factorization and a Jacobi-preconditioned CG fallback.

pub mod cholesky;
pub mod dense;
pub mod ordering;
pub mod pcg;
pub mod sparse;

pub use cholesky::{CholeskyFactor, SymbolicCholesky};
pub use ordering::{grid_nested_dissection, DissectionNode};
pub use pcg::{pcg_jacobi, PcgReport};
pub use sparse::CsrMatrix;
