//! Weighted least-squares reconstruction in wavelet spaces on `[0, 1]` from
//! nonuniform Fourier samples.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod operators;
pub mod quadrature;
pub mod sampling;
pub mod wavelets;

pub use error::{NugsError, Result};
