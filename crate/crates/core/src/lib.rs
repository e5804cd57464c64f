//! Numerical laboratory for the Willmore flow of surfaces of revolution with
//! Dirichlet boundary data, studied through the weighted elastic flow of
//! profile curves in the hyperbolic half-plane.

pub mod acceptance;
pub mod elastica;
pub mod ellip;
pub mod error;
pub mod flow;
pub mod geomcheck;
pub mod hyp2;
pub mod io;
pub mod linalg;
pub mod quad;
pub mod scenarios;

pub use error::{Error, Result};
