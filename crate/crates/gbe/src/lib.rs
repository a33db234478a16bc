//! Monte Carlo sampling, tabular output and the `gbe` command line, built
//! on the exact distributions of `gbe-core`.

pub mod cli;
pub mod ecdf;
pub mod eigen;
pub mod ensemble;
pub mod error;
pub mod table;
pub mod verify;

pub use error::{Error, Result};
