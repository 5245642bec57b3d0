//! Good straight-line embeddings of planar graphs, maximal circle packings,
//! and random-walk potential theory on their finite truncations.

pub mod error;
pub mod generate;
pub mod goodness;
pub mod geom;
pub mod graph;
pub mod io;
pub mod metric;
pub mod packing;
pub mod potential;
pub mod render;
pub mod sparse;
pub mod triangulation;
pub mod walk;

pub use error::{Error, GraphError};
pub use geom::{AngleInterval, Point};
pub use graph::{EmbeddedGraph, Face, VertexId};
pub use triangulation::Triangulation;
