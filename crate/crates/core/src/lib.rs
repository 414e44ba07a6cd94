//! Finite-dimensional reproducing kernels, their boundary factorizations
//! over atomic measures, Gaussian realizations and Clark-type kernels.

pub mod clark;
pub mod corpus;
pub mod error;
pub mod factorization;
pub mod gaussian;
pub mod jobs;
pub mod kernel;
pub mod linalg;
pub mod rkhs;
pub mod wire;

pub use error::{Error, Result};
pub use kernel::{FiniteKernel, Kernel, PointSet};
