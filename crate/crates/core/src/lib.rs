//! Data completion for the Laplace equation on 2D domains.
//!
//! When a harmonic field is measured on only part of a boundary — both its
//! values and its normal flux on an accessible segment, nothing on the rest —
//! the missing boundary data can be reconstructed by alternating between
//! well-posed mixed Dirichlet/Neumann solves. This crate implements the
//! complete pipeline:
//!
//! * [`mesh`] — unit-disk triangulations with labeled boundary segments and a
//!   plain-text mesh format,
//! * [`sparse`] — CSR matrices and a Jacobi-preconditioned conjugate gradient
//!   solver,
//! * [`fem`] — P1 assembly, mixed boundary-value solves, boundary traces,
//!   variational flux recovery, and boundary L2 norms,
//! * [`kmf`] — the classical KMF completion iteration and the split-boundary
//!   alternating variant,
//! * [`experiment`] — a benchmark runner reproducing the unit-disk study with
//!   CSV output.
//!
//! All numerical modules are generic over the scalar type through
//! [`scalar::Real`]; the aliases below fix the common instantiations.

pub mod experiment;
pub mod fem;
pub mod kmf;
pub mod mesh;
pub mod scalar;
pub mod sparse;

pub use fem::{BoundaryCondition, BoundaryField, FemSolution, MixedBvp};
pub use kmf::{CauchyData, CompletionResult, IterationRecord, KmfOptions};
pub use mesh::{generate_disk_mesh, Point2, Region, SegmentLabel, TriMesh};
pub use scalar::Real;
pub use sparse::{conjugate_gradient, CsrMatrix, SolveReport};

/// Double-precision mesh, the default working type.
pub type TriMesh64 = TriMesh<f64>;
/// Single-precision mesh.
pub type TriMesh32 = TriMesh<f32>;
/// Double-precision sparse matrix.
pub type CsrMatrix64 = CsrMatrix<f64>;
/// Single-precision sparse matrix.
pub type CsrMatrix32 = CsrMatrix<f32>;
/// Double-precision boundary field.
pub type BoundaryField64 = BoundaryField<f64>;
/// Single-precision boundary field.
pub type BoundaryField32 = BoundaryField<f32>;
