use rayon::prelude::*;

use super::grid::SurfaceGrid;

/// Conservative one-sided (interior) reach of a single surface.
///
/// Minimum over nodes of the curvature bound `1 / max|kappa|` and of the
/// largest inward tangent ball that avoids every other node.
pub fn estimate_reach(grid: &SurfaceGrid) -> f64 {
    let pts = grid.points();
    grid.nodes
        .par_iter()
        .enumerate()
        .map(|(i, nd)| {
            let mut r = if nd.kappa_max > 0.0 { 1.0 / nd.kappa_max } else { f64::INFINITY };
            for (j, y) in pts.iter().enumerate() {
                if j == i {
                    continue;
                }
                let d = y - nd.chart.x;
                let dn = d.dot(&nd.n);
                if dn < 0.0 {
                    r = r.min(d.norm_squared() / (-2.0 * dn));
                }
            }
            r
        })
        .reduce(|| f64::INFINITY, f64::min)
}

/// Reach over several disjoint components, capped by half the smallest inter-component gap.
pub fn estimate_reach_multi(grids: &[&SurfaceGrid]) -> f64 {
    let mut r = grids.iter().map(|g| estimate_reach(g)).fold(f64::INFINITY, f64::min);
    for a in 0..grids.len() {
        for b in a + 1..grids.len() {
            r = r.min(0.5 * min_distance(grids[a], grids[b]));
        }
    }
    r
}

/// Smallest node-to-node distance between two grids.
pub fn min_distance(a: &SurfaceGrid, b: &SurfaceGrid) -> f64 {
    let pb = b.points();
    a.nodes
        .par_iter()
        .map(|nd| pb.iter().map(|y| (y - nd.chart.x).norm()).fold(f64::INFINITY, f64::min))
        .reduce(|| f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sample_grid, ParamSurface};

    #[test]
    fn reach_of_sphere_torus_and_shell() {
        let s = sample_grid(&ParamSurface::Sphere { radius: 1.0 }, 16, 16).unwrap();
        assert!((estimate_reach(&s) - 1.0).abs() < 1e-10);
        let t = sample_grid(&ParamSurface::TorusRev { major: 2.0, minor: 1.0 }, 32, 16).unwrap();
        let rt = estimate_reach(&t);
        assert!(rt <= 1.0 + 1e-12 && rt > 0.99, "{rt}");
        let inner = sample_grid(&ParamSurface::TorusRev { major: 2.0, minor: 0.5 }, 32, 16).unwrap();
        let shell = estimate_reach_multi(&[&t, &inner]);
        assert!((shell - 0.25).abs() < 1e-10, "{shell}");
    }
}
