//! Numerical kernels for the heat equation on Q_p^n driven by the
//! Taibleson operator.
//!
//! Everything here is `no_std` with `alloc`; IO, caching and the command
//! line live in the `padic-heat` crate.

#![no_std]
// `!(x > 0.0)` style guards also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bounds;
pub mod cauchy;
pub mod diffusion;
pub mod elliptic;
pub mod error;
pub mod gamma;
pub mod kernel;
pub mod lcf;
pub mod num;
pub mod operator;
pub mod padic;
pub mod quad;
pub mod radial;
pub mod window;

pub use error::{Error, Result};
pub use lcf::{Convolution, LocallyConstantFunction, Piece};
pub use padic::{Ball, PAdicPoint, PAdicScalar, Radius};
pub use radial::{RadialFunction, SeriesConfig, Tail};
pub use window::FiniteWindow;
