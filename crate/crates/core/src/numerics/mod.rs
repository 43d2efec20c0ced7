//! Shared numerical substrate: grids, stencils, quadrature, interpolation
//! and the fourth-order stepper.

pub mod diff;
pub mod grid;
pub mod interp;
pub mod quad;
pub mod stepper;

pub use diff::{laplacian, partial_u, partial_u4, partial_v, partial_v4, second_u, second_v};
pub use grid::{BaseIndex, Grid2, GridSpec, ScalarGrid};
pub use interp::{invert_monotone_map, MonotoneMap};
pub use quad::{cumulative_integral_u, cumulative_integral_v};
