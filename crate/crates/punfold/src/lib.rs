//! Simplicial branched covers via the partial unfolding.
//!
//! The library computes, for finite pure simplicial complexes:
//!
//! * structural queries (stars, links, dual graphs, shellings) and canonical
//!   example generators — [`complex`];
//! * stellar edge subdivisions and barycentric subdivision with carrier
//!   tracking — [`subdivision`];
//! * perspectivities, projectivities, the group of projectivities and the odd
//!   subcomplex — [`projectivity`];
//! * a GF(2) planner that chooses edge subdivisions to realize a prescribed
//!   odd subcomplex — [`planner`];
//! * the partial unfolding as a pseudo-simplicial complex, its components and
//!   branched-cover structure — [`unfolding`];
//! * foldability and the extension of a k-colored subcomplex to a colored
//!   refinement by edge subdivisions — [`coloring`];
//! * the shelling-driven construction of a sphere whose partial unfolding
//!   realizes a prescribed simple branched cover — [`cover`];
//! * canonical JSON file formats — [`io`].

pub mod complex;
pub mod coloring;
pub mod cover;
pub mod io;
pub mod planner;
pub mod projectivity;
pub mod subdivision;
pub mod unfolding;

pub use complex::{Face, SimplicialComplex, VertexId};
