//! Statistics of the Jaccard index on Erdos-Renyi random graphs.

pub mod error;
pub mod graph;
mod kahan;
pub mod limits;
pub mod moments;
pub mod pairs;
pub mod rng;

pub use error::{Error, Result};
pub use graph::Graph;
pub use rng::Seed;
