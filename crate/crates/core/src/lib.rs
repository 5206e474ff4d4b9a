pub mod error;
pub mod experiments;
pub mod functionals;
pub mod geometry;
pub mod kernels;
pub mod network;
pub mod numeric;
pub mod rkhs;
pub mod spectral;

pub use error::{Error, Result};
