//! Local search allocation of balls into bins arranged as a graph.
//!
//! Each ball is born at a uniformly random vertex and walks to the least
//! loaded neighbor while that neighbor is strictly lighter, stopping at the
//! first local minimum. The crate provides the graph families the process is
//! usually studied on, the allocator with pluggable tie-breaking, coupling
//! experiments, bound certificates and diagnostics, and a sweep harness that
//! emits CSV/JSON/SVG.

pub mod allocator;
pub mod analysis;
pub mod coupling;
pub mod error;
pub mod graphs;
pub mod harness;
pub mod par;
pub mod rng;

pub use allocator::{BallTrace, LoadVector, TieRule};
pub use error::{Error, Result};
pub use graphs::{Graph, Vertex, VertexSet};
pub use rng::RandomSource;
