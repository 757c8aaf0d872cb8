//! Learned landscape surrogates for decision-focused learning.
//!
//! A target model `c_θ` maps observed features to the linear cost vector of a
//! surrogate optimization problem; a landscape model `M_w` learns the true
//! decision loss of the resulting solver output. The two are trained in
//! alternation so that the target minimizes the learned loss landscape while
//! only calling the combinatorial solver as a black box.

pub mod diffmodels;
mod error;
pub mod json;
pub mod lancer;
pub mod metrics;
pub mod problems;
pub mod rng;
pub mod solvers;

pub use error::{Error, Result};
