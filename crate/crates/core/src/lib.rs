//! Free-energy minimizers of aggregation-diffusion equations with homogeneous
//! attractive kernels `|x|^lambda` and fast diffusion `0 < q < 1`.
//!
//! A minimizer is a radial probability measure `M delta_0 + rho`. The crate
//! locates the absolutely continuous part `rho` through the Euler-Lagrange
//! fixed point and reports the concentrated mass `M`:
//!
//! * [`quartic`] solves `lambda = 4` exactly (closed forms backed by quadrature),
//! * [`even_lambda`] reduces `lambda = 2n` to an `(n-1)`-dimensional fixed point,
//! * [`general_lambda`] handles arbitrary `lambda` through a polynomial ansatz.
//!
//! The supporting pieces are the interaction kernel and special functions in
//! [`specfun`], semi-infinite quadrature in [`quadrature`], and root finding and
//! BFGS in [`numerics`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod even_lambda;
pub mod general_lambda;
pub mod numerics;
pub mod params;
pub mod poly;
pub mod quadrature;
pub mod quartic;
pub mod specfun;

pub use error::{Error, Result};
pub use params::{Extended, ProblemParams, Regime};
