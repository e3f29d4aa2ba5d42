//! Approximate Stokes fields for a rigid sphere approaching a plane wall
//! under Navier slip, the resulting drag asymptotics, and the
//! one-dimensional fall dynamics they induce.

pub mod drag;
pub mod dynamics;
pub mod envelope;
pub mod error;
pub mod field;
pub mod geometry;
pub mod jet;
pub mod profile;
pub mod quadrature;
pub mod regression;

pub use error::{Error, Result};
