//! Second-neighborhood witness search in oriented graphs that are
//! tournaments minus a matching, a star, or both.
//!
//! A witness is a vertex with at least as many second out-neighbors as
//! out-neighbors. The crate finds witnesses through median orders
//! (orderings maximizing forward arcs), safe completions of the missing
//! edges, and a sedimentation process on good median orders, and it
//! verifies every structural step it relies on at runtime.

pub mod degenerate;
pub mod error;
pub mod graph;
pub mod io;
pub mod matching;
pub mod median;
pub mod oracle;
pub mod witness;

pub use error::{Error, Result};
pub use graph::{MissingStructure, OrientedGraph, Tournament, VertexId};
pub use oracle::{FuzzConfig, FuzzReport, InstanceClass};
pub use witness::{ProofPath, WitnessReport};
