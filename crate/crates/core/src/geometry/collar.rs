use std::sync::Arc;

use super::grid::SurfaceGrid;
use super::reach::estimate_reach;
use crate::error::{Error, Result};
use crate::quadrature::Rule1D;
use crate::vec3::{Mat3, Vec3};

/// Gauss nodes per composite panel in the normal direction.
pub const PANEL_NODES: usize = 16;

/// Interior collar `{-2 r0 <= rho <= 0}` in coordinates `(u, v, rho)`,
/// `x = X(u, v) + rho n(u, v)`.
#[derive(Clone, Debug)]
pub struct CollarGrid {
    pub grid: Arc<SurfaceGrid>,
    pub r0: f64,
    pub rho: Rule1D,
    /// Panel edges of the normal rule, ascending.
    pub edges: Vec<f64>,
}

/// Panel edges `-2 r0, -r0, -r0/2, ...` down to `finest`, then `0`.
pub fn geometric_edges(r0: f64, panels: usize) -> Vec<f64> {
    let mut e: Vec<f64> = (0..panels).map(|k| -2.0 * r0 * 0.5f64.powi(k as i32)).collect();
    e.push(0.0);
    e
}

pub fn build_collar(grid: Arc<SurfaceGrid>, r0: f64, n_rho: usize) -> Result<CollarGrid> {
    if n_rho < PANEL_NODES {
        return Err(Error::InvalidGrid(format!("N_rho = {n_rho} < {PANEL_NODES}")));
    }
    let reach = estimate_reach(&grid);
    build_collar_with(grid, r0, (n_rho / PANEL_NODES).max(1), reach)
}

/// Collar whose finest panel is narrower than `lambda / 4`.
pub fn build_collar_for_lambda(grid: Arc<SurfaceGrid>, r0: f64, lambda: f64, reach: f64) -> Result<CollarGrid> {
    let mut panels = 1;
    while 2.0 * r0 * 0.5f64.powi(panels as i32 - 1) >= 0.25 * lambda && panels < 60 {
        panels += 1;
    }
    // keep -r0 as an edge: the cutoff is only C2 there
    let c = build_collar_with(grid, r0, panels.max(2), reach)?;
    let err = c.profile_oracle_error(lambda);
    if err > 1e-2 {
        return Err(Error::UnderResolved(format!("lambda = {lambda:.3e}: relative error {err:.2e}")));
    }
    Ok(c)
}

pub fn build_collar_with(grid: Arc<SurfaceGrid>, r0: f64, panels: usize, reach: f64) -> Result<CollarGrid> {
    if !(r0 > 0.0) || 2.0 * r0 >= reach {
        return Err(Error::InjectivityFailure(format!("2 r0 = {} not below reach {reach:.4}", 2.0 * r0)));
    }
    let edges = geometric_edges(r0, panels);
    let rho = Rule1D::composite(&edges, PANEL_NODES);
    let c = CollarGrid { grid, r0, rho, edges };
    c.check_injective()?;
    Ok(c)
}

impl CollarGrid {
    pub fn n_surface(&self) -> usize {
        self.grid.len()
    }

    pub fn n_rho(&self) -> usize {
        self.rho.len()
    }

    pub fn len(&self) -> usize {
        self.n_surface() * self.n_rho()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn position(&self, k: usize, rho: f64) -> Vec3 {
        let nd = &self.grid.nodes[k];
        nd.chart.x + nd.n * rho
    }

    /// Columns `X_u + rho n_u`, `X_v + rho n_v`, `n`.
    pub fn jacobian(&self, k: usize, rho: f64) -> Mat3 {
        let nd = &self.grid.nodes[k];
        Mat3::from_columns(&[nd.chart.xu + nd.dn_du * rho, nd.chart.xv + nd.dn_dv * rho, nd.n])
    }

    pub fn det(&self, k: usize, rho: f64) -> f64 {
        self.jacobian(k, rho).determinant()
    }

    /// Parameter-space weight of surface node `k` (without the Jacobian).
    pub fn param_weight(&self, k: usize) -> f64 {
        self.grid.param_wu[k / self.grid.nv] * self.grid.param_wv
    }

    pub fn weight(&self, k: usize, m: usize) -> f64 {
        self.det(k, self.rho.nodes[m]) * self.param_weight(k) * self.rho.weights[m]
    }

    pub fn volume(&self) -> f64 {
        (0..self.n_surface())
            .map(|k| (0..self.n_rho()).map(|m| self.weight(k, m)).sum::<f64>())
            .sum()
    }

    /// Relative error of the normal rule on `int exp(2 rho / lambda)`.
    pub fn profile_oracle_error(&self, lambda: f64) -> f64 {
        let exact = 0.5 * lambda * (1.0 - (-4.0 * self.r0 / lambda).exp());
        let got = self.rho.integrate(|r| (2.0 * r / lambda).exp());
        (got - exact).abs() / exact
    }

    fn check_injective(&self) -> Result<()> {
        let mut probe = self.rho.nodes.clone();
        probe.push(-2.0 * self.r0);
        probe.push(0.0);
        for k in 0..self.n_surface() {
            let jac = self.grid.nodes[k].jac;
            for &r in &probe {
                let d = self.det(k, r);
                if !(d > 1e-6 * jac) {
                    return Err(Error::InjectivityFailure(format!(
                        "det J = {d:.3e} at node {k}, rho = {r:.4}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sample_grid, ParamSurface};
    use std::f64::consts::PI;

    #[test]
    fn sphere_shell_volume() {
        let g = Arc::new(sample_grid(&ParamSurface::Sphere { radius: 1.0 }, 16, 16).unwrap());
        let c = build_collar(g, 0.25, 32).unwrap();
        let exact = 4.0 * PI / 3.0 * (1.0 - 0.125);
        assert!((c.volume() - exact).abs() < 1e-8, "{}", c.volume());
    }

    #[test]
    fn torus_collar_volume_and_oracle() {
        let g = Arc::new(sample_grid(&ParamSurface::TorusRev { major: 2.0, minor: 1.0 }, 32, 16).unwrap());
        let c = build_collar_for_lambda(g, 0.25, 0.25 / 64.0, 1.0).unwrap();
        // solid torus volume 2 pi^2 R r^2 between tube radii 0.5 and 1
        let exact = 2.0 * PI * PI * 2.0 * (1.0 - 0.25);
        assert!((c.volume() - exact).abs() < 1e-10 * exact);
        assert!(c.profile_oracle_error(0.25 / 64.0) < 1e-10);
        assert!((c.position(5, 0.0) - c.grid.nodes[5].chart.x).norm() == 0.0);
    }

    #[test]
    fn collar_too_deep_is_rejected() {
        let g = Arc::new(sample_grid(&ParamSurface::TorusRev { major: 2.0, minor: 1.0 }, 16, 16).unwrap());
        assert!(matches!(build_collar(g, 0.6, 16), Err(Error::InjectivityFailure(_))));
    }
}
