//! Sliced persistence diagrams of two-parameter filtrations and the
//! matching distances between them.
//!
//! A bifiltration `f = (f1, f2)` on a finite simplicial complex is restricted
//! to the family of positive-slope lines `r_{a,b}`, producing one scalar
//! lower-star filtration per parameter pair `(a, b)`. The crate computes the
//! persistence diagrams of those slices, the classical 2D matching distance
//! (sup over parameters of the bottleneck distance between normalized slice
//! diagrams), and the coherent 2D matching distance, in which a single
//! matching chosen at a basepoint is transported along parameter paths. The
//! transport machinery also exposes the monodromy phenomenon: loops around
//! singular parameter pairs can permute cornerpoints.
//!
//! Module map:
//! - [`complex`]: complexes, bifiltrations, working-assumption checks
//! - [`persistence`]: lower-star reduction plus the PBN/multiplicity oracles
//! - [`foliation`]: admissible lines, slice functions, singular-pair detection
//! - [`matching`]: bottleneck distance and matching enumeration
//! - [`transport`]: cornerpoint/matching transport and loop permutations
//! - [`coherent`]: `D_match` / `CD_match` estimators and the property checks
//! - [`io`]: the `v`/`s` text format, CSV/JSON/SVG emission
//! - [`fixtures`]: seeded generators for the test corpus

pub mod complex;
pub mod field;
pub mod fixtures;
pub mod foliation;
pub mod io;
pub mod matching;
pub mod persistence;
pub mod transport;

pub mod coherent;

pub use complex::{Bifiltration, BuildMode, SimplicialComplex};
pub use foliation::{ParameterPoint, ParameterRegion};
pub use persistence::{Cornerpoint, Death, PersistenceDiagram, ScalarField};
