//! Classical core of Regev-style factoring and discrete-logarithm algorithms
//! at desk scale: relation lattices modulo `N`, Dirichlet-character lattice
//! point counts, lattice reduction, product-tree multi-exponentiation, and
//! the factoring / discrete-log post-processing pipelines.

pub mod arith;
pub mod error;
pub mod group;
pub mod characters;
pub mod lattice;
pub mod pipelines;
pub mod sampler;
mod serde_util;

pub use error::{Error, Result};
