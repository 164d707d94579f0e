//! Exact symbolic dynamics of golden-ratio expansions.

pub mod dynamics;
pub mod entropy;
pub mod goldfield;
pub mod graph;
pub mod measures;
pub mod torus;
pub mod words;

pub use goldfield::GoldenNumber;
