//! Sequential-in-time nonlinear parametrization for fractional Burgers equations.
//!
//! The crate evolves the parameters of a small tanh network so that the
//! network tracks the solution of one of two fractional Burgers models:
//! one with a fractional Laplacian in the diffusion term, one with a nonlocal
//! Caputo flux. At every stage the PDE right-hand side is projected onto the
//! tangent space of the network by a regularized least-squares solve.

pub mod ansatz;
pub mod error;
pub mod fracops;
pub mod metrics;
pub mod models;
pub mod par;
pub mod projection;
pub mod reference;
pub mod stnp;
pub mod timestepping;

pub use error::{Error, Result};
