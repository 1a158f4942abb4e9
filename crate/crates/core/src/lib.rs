// `!(x > 0.0)` style guards reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

//! p-Laplacian potential theory on model manifolds and 2D meshes.

pub mod capacity;
pub mod constants;
pub mod green;
pub mod imcf;
pub mod interp;
pub mod mesh;
pub mod model;
pub mod quadrature;
pub mod solver;
pub mod sparse;
pub mod suite;
