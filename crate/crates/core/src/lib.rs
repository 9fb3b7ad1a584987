//! Bond percolation on Cayley graphs of marked abelian groups.

pub mod error;
pub mod experiments;
pub mod geometry;
pub mod lattice;
pub mod cayley;
pub mod criterion;
pub mod marked_group;
pub mod percolation;

pub use error::{Error, Result};
