//! Symmetrization and comparison principles for the Dirichlet Laplacian.
//!
//! The crate pairs closed-form radial solutions on balls with discrete solvers on
//! planar and flat-cone domains, and measures the slack in each comparison
//! inequality between them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod pde;
pub mod quadrature;
pub mod radial;
pub mod rearrange;
pub mod source;
pub mod specialfn;
pub mod verify;

pub use error::{Error, Result};
