//! Three-dimensional prolate spheroidal wave functions and their use as a
//! low-rank basis for Born inverse medium scattering.
//!
//! The crate covers the special functions and quadratures behind the basis,
//! the basis itself, analytic and brute-force Born data, the far-field to
//! processed-data pipeline, and the spectral reconstructions.

pub mod borndata;
pub mod config;
pub mod error;
pub mod io;
pub mod pipeline;
pub mod pswf;
pub mod quadrature;
pub mod reconstruct;
pub mod specfun;

pub use error::{Error, Result};
