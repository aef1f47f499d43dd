//! Moment geometry of generalized real flag manifolds.
//!
//! An isotropy orbit M = Ad(K)·q of a compact symmetric pair (g, k) sits in
//! p as an isoparametric submanifold. This crate builds matrix models of such
//! pairs, computes their restricted roots and Weyl groups, the moment map
//! μ: M → a and its polytope, the critical structure of f = ‖μ − a‖², fiber
//! connectivity by sampling, and the torus criterion for Kirwan surjectivity.

pub mod error;
pub mod kirwan;
pub mod morse;
pub mod numerics;
pub mod report;
pub mod symmetric_space;
pub mod verify;
pub mod weyl_moment;

pub use error::{Error, Result};
