//! Parametrized closed surfaces, their Nystrom grids, the interior collar,
//! homology cycles and the nearest-point map.

pub mod collar;
pub mod cycles;
pub mod grid;
pub mod nearest;
pub mod reach;
pub mod surface;

pub use collar::{build_collar, build_collar_for_lambda, CollarGrid};
pub use cycles::{cycle_integral, torus_cycles, Curve, CyclePath, Homology};
pub use grid::{sample_grid, sample_grid_offset, GridNode, SurfaceGrid};
pub use nearest::{nearest_point, NearestPoint, NearestPointMap};
pub use reach::{estimate_reach, estimate_reach_multi};
pub use surface::{build_surface, Axis, ChartPoint, ParamSurface, SurfaceParams, TWISTED_TORUS_COEFFS};
