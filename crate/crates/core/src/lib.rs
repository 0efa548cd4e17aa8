//! Numerical laboratory for boundary blow-up of the prescribed scalar and
//! mean curvature problem on manifolds with umbilic boundary.

pub mod bubble;
pub mod corrector;
pub mod error;
pub mod geom;
pub mod model;
pub mod quad;
pub mod reduced;
pub mod report;
pub mod tol;
pub mod verify;

pub use error::{Error, Result};
