//! GeRoST: geometrically robust online subspace tracking on the Grassmann
//! manifold, with the nominal GREAT baseline, synthetic stream generators,
//! and an evaluation harness that runs the underlying guarantees as
//! executable property suites.
//!
//! The tracker estimates a k-dimensional subspace from a sliding window of
//! noisy samples. Each step computes a nominal d-dimensional subspace from
//! the window SVD, surrounds it with a chordal-distance uncertainty ball,
//! solves the inner worst-case maximization in closed form through a single
//! eigendecomposition plus a scalar bisection, and takes K Riemannian
//! gradient steps against that worst case.

pub mod error;
pub mod tol;

pub mod datagen;
pub mod eval;
pub mod grassmann;
pub mod suite;
pub mod tracker;
pub mod worstcase;

pub use error::{Error, Result};
