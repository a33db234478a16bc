//! Largest-eigenvalue distributions of the Gaussian orthogonal, unitary and
//! symplectic ensembles at finite N, computed exactly from (skew-)orthogonal
//! polynomials on a truncated domain, together with the Tracy-Widom limits.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod beta;
pub mod cdf;
pub mod error;
pub mod moments;
pub mod painleve;
pub mod pfaffian;
pub mod precision;
pub mod quad;
pub mod real;
pub mod skew;

pub use beta::Beta;
pub use error::{Error, Result};
pub use precision::{Cutoff, PrecisionContext};
pub use real::Real;
