use std::f64::consts::PI;

use crate::geometry::SurfaceGrid;
use crate::vec3::Vec3;

/// Scalar density on a grid, tagged with its boundary component.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceDensity {
    pub values: Vec<f64>,
    pub component: usize,
}

/// Distances below this many grid spacings lose smooth-rule accuracy.
pub const NEAR_SPACINGS: f64 = 3.0;

/// Whether `x` is too close to the surface for the smooth rule.
pub fn near_surface(grid: &SurfaceGrid, x: &Vec3) -> bool {
    let h = grid.max_spacing();
    grid.nodes.iter().any(|n| (n.chart.x - x).norm() < NEAR_SPACINGS * h)
}

/// Single-layer potential `sum w sigma / (4 pi |x - y|)`.
pub fn eval_s(grid: &SurfaceGrid, sigma: &[f64], x: &Vec3) -> f64 {
    let w = grid.weights();
    grid.nodes
        .iter()
        .enumerate()
        .map(|(k, n)| w[k] * sigma[k] / (x - n.chart.x).norm())
        .sum::<f64>()
        / (4.0 * PI)
}

/// Gradient of the single-layer potential.
pub fn eval_grad_s(grid: &SurfaceGrid, sigma: &[f64], x: &Vec3) -> Vec3 {
    let w = grid.weights();
    let mut g = Vec3::zeros();
    for (k, n) in grid.nodes.iter().enumerate() {
        let r = x - n.chart.x;
        let d = r.norm();
        g -= r * (w[k] * sigma[k] / (d * d * d));
    }
    g / (4.0 * PI)
}
