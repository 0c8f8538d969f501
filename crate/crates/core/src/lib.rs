//! Stochastic parallel transport, tangent processes on path space and
//! Brownian-rotation morphisms, simulated on small compact manifolds.

pub mod error;
pub mod geometry;
pub mod linalg;
pub mod morphism;
pub mod path_space;
pub mod sde;
pub mod tangent;

pub use error::{Error, Result};
