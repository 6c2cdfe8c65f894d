//! Spread hypergraphs and the Kolmogorov extractor families they encode.

pub mod attack;
pub mod exact;
pub mod extractor;
pub mod game;
pub mod hypergraph;
pub mod rates;
pub mod sampler;
pub mod seed;

pub use exact::Rational;
pub use hypergraph::{EdgeKind, GraphError, Hypergraph, Vertex, VertexSet};
