//! Riemannian geometry of the space of Hermitian metrics on a complex vector
//! bundle, discretized over a quadrature mesh.
//!
//! The crate is generic over the scalar type (`f32` or `f64`, see [`Real`]);
//! the aliases at the crate root fix it to `f64`, which is what the CLI and the
//! acceptance suite use.
#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > y)` also rejects NaN

pub mod checks;
pub mod completion;
pub mod error;
pub mod fiber;
pub mod holomorphic;
pub mod io;
pub mod linalg;
pub mod sampling;
mod scalar;
pub mod section;

pub use error::{Error, Result};
pub use scalar::Real;

pub type CMatrix = linalg::CMatrix<f64>;
pub type HermitianMatrix = linalg::HermitianMatrix<f64>;
pub type PosDefMatrix = linalg::PosDefMatrix<f64>;
pub type EigenDecomposition = linalg::EigenDecomposition<f64>;
pub type AlphaParam = fiber::AlphaParam<f64>;
pub type FiberGeodesic = fiber::FiberGeodesic<f64>;
