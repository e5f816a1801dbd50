//! Numerical Alexander-Spanier Chern character cocycles.
//!
//! The crate evaluates explicit cocycles on tuples of nearby sample points of
//! a space: the odd-degree cocycles built from unitary-valued samples and the
//! even-degree ones built from projector-valued samples. Affine interpolation
//! over the standard simplex, spectral projectors, and signed simplex
//! quadrature turn each tuple into a number; pairing the cocycles with
//! fundamental cycles of triangulated manifolds recovers integer invariants
//! (winding numbers, Chern numbers, the degree of a map).
//!
//! Modules:
//! - [`linalg`]: dense complex matrix kernel (products, inverses, Hermitian
//!   eigendecomposition, spectral norm, principal log-determinant);
//! - [`quad`]: Grundmann-Moller rules on the n-simplex with edgewise
//!   refinement and deterministic reduction;
//! - [`ascomplex`]: cochains, finitely supported chains, coboundary, cup
//!   product and the chain/cochain pairing;
//! - [`chern_odd`] / [`chern_even`]: the cocycle evaluators themselves;
//! - [`geom`]: example generators on S^1, S^2, T^2, S^3, the smooth
//!   comparison map to differential forms, and independent dense-grid
//!   oracles;
//! - [`checks`]: seeded property suites behind the CLI `check` command;
//! - [`io`]: JSON schemas for meshes, samples, chains and run reports.

pub mod ascomplex;
pub mod checks;
pub mod chern_even;
pub mod chern_odd;
pub mod error;
pub mod geom;
pub mod io;
pub mod linalg;
pub mod quad;
mod perm;

pub use error::{Error, Result};
pub use linalg::CMat;
pub use quad::{QuadConfig, QuadRule};

/// Complex scalar used throughout.
pub type Complex = num_complex::Complex64;
