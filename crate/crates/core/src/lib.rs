#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod complexification;
pub mod constants;
pub mod error;
pub mod euclid;
pub mod heatlab;
pub mod heisenberg;
pub mod io;
pub mod quadrature;
pub mod specfun;
pub mod suites;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
