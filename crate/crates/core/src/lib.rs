//! Benchmarks for missing-interaction inference on small social graphs.
//!
//! The pipeline derives a clique hypergraph from an interaction graph, hides a
//! fraction of its hyperedges, and asks each method to rank the hidden
//! hyperedges (or, for the dyadic task, the hidden edges) above size-matched
//! random node sets. Methods covered:
//!
//! * dyadic heuristics (common neighbours, Adamic–Adar) and their mean lift to
//!   node sets, a constant null scorer, and truncated spectral matrix completion;
//! * a Chebyshev spectral hyperlink predictor trained on the observed hyperedges;
//! * ERGM conditional tie probabilities fitted by maximum pseudolikelihood.
//!
//! Everything is seeded: the same configuration reproduces identical results.

pub mod cheshire;
pub mod dyadic;
pub mod ergm;
mod error;
pub mod evaluation;
pub mod graph;
pub mod hypergraph;
pub mod masking;
pub mod pipeline;
pub mod rng;

pub use error::{Error, Result};
pub use graph::{Graph, SummaryStats};
pub use hypergraph::{Hypergraph, IncidenceMatrix};
