//! Learning ancestral causal graphs (directed + bidirected edges) from
//! categorical observational data.
//!
//! The crate provides the pieces end to end: dataset ingestion and
//! joint counts, plug-in multivariate information, mixed graphs with
//! separation and ac-connectivity queries, normalized-maximum-likelihood
//! scores, the two-step greedy structure search, and a simulation and
//! grading harness for benchmarks.

pub mod bench;
pub mod error;
pub mod graph;
pub mod info;
pub mod net;
pub mod nml;
pub mod score;
pub mod search;
pub mod table;
pub mod vset;

pub use error::{Error, Result};
pub use graph::MixedGraph;
pub use table::CategoricalTable;
pub use vset::VertexSet;
