//! Spectral and combinatorial checks for regular graphs, symmetric association
//! schemes and finite spherical sets.
//!
//! Everything numeric is generic over [`numerics::Scalar`] (`f32` or `f64`);
//! the aliases below fix `f64`, which is what the command-line tool uses.

pub mod analysis;
pub mod combinatorics;
pub mod generators;
pub mod graphs;
pub mod numerics;
pub mod polyprops;
pub mod report;
pub mod schemes;
pub mod spherical;

pub use analysis::{analyze_graph, analyze_scheme, scan, AnalysisOptions, ScanFamily};
pub use generators::FamilySpec;
pub use graphs::Graph;
pub use numerics::{Scalar, DEFAULT_MAX_DENSE, DEFAULT_TOL};
pub use report::{Status, TheoremReport};
pub use schemes::{IntersectionNumbers, RelationPartition, SeedSet};

pub type SymMatrix64 = numerics::SymMatrix<f64>;
pub type SquareMatrix64 = numerics::SquareMatrix<f64>;
pub type Scheme64 = schemes::Scheme<f64>;
pub type SchemeParameters64 = schemes::SchemeParameters<f64>;
pub type SphericalSet64 = spherical::SphericalSet<f64>;
pub type AnalysisOptions64 = analysis::AnalysisOptions<f64>;
