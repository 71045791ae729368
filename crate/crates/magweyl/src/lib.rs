pub mod error;
pub mod grid;
pub mod harness;
pub mod magnetics;
pub mod quad;
pub mod products;
pub mod supercalc;
pub mod weyl;

mod lattice;

pub use error::{Error, Result};
