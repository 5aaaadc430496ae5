//! Generalized belief propagation on region graphs, free-energy-invariant
//! region-graph transforms, and sequential region pursuit.

pub mod elimination;
pub mod error;
pub mod exact;
pub mod experiment;
pub mod factor_graph;
pub mod gbp;
pub mod pursuit;
pub mod region_graph;
pub mod table;
pub mod transforms;

pub use error::{Error, Result};
