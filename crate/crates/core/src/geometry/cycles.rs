use std::f64::consts::PI;

use super::grid::SurfaceGrid;
use super::surface::ParamSurface;
use crate::error::{Error, Result};
use crate::vec3::Vec3;

/// Samples of the poloidal angle used to average the chart into its centerline.
const CENTERLINE_SAMPLES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Homology {
    A,
    B,
}

/// Closed curve with analytic tangent, `t` in `[0, 2 pi)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Curve {
    Circle { center: Vec3, e1: Vec3, e2: Vec3, radius: f64 },
    /// `X(u0, t) + eps n(u0, t)`
    Poloidal { surface: ParamSurface, u0: f64, eps: f64 },
    /// `X(t, v0) + eps n(t, v0)`
    Toroidal { surface: ParamSurface, v0: f64, eps: f64 },
    /// Poloidal average of the chart.
    Centerline { surface: ParamSurface },
}

impl Curve {
    /// Horizontal circle about the z-axis.
    pub fn circle_z(radius: f64, z: f64) -> Self {
        Curve::Circle {
            center: Vec3::new(0.0, 0.0, z),
            e1: Vec3::x(),
            e2: Vec3::y(),
            radius,
        }
    }

    pub fn eval(&self, t: f64) -> (Vec3, Vec3) {
        match self {
            Curve::Circle { center, e1, e2, radius } => {
                let (s, c) = t.sin_cos();
                (center + (e1 * c + e2 * s) * *radius, (e2 * c - e1 * s) * *radius)
            }
            Curve::Poloidal { surface, u0, eps } => {
                let c = surface.eval(*u0, t);
                let (_, nv) = c.normal_derivatives();
                (c.x + c.normal() * *eps, c.xv + nv * *eps)
            }
            Curve::Toroidal { surface, v0, eps } => {
                let c = surface.eval(t, *v0);
                let (nu, _) = c.normal_derivatives();
                (c.x + c.normal() * *eps, c.xu + nu * *eps)
            }
            Curve::Centerline { surface } => {
                let mut p = Vec3::zeros();
                let mut d = Vec3::zeros();
                for j in 0..CENTERLINE_SAMPLES {
                    let c = surface.eval(t, 2.0 * PI * j as f64 / CENTERLINE_SAMPLES as f64);
                    p += c.x;
                    d += c.xu;
                }
                let s = 1.0 / CENTERLINE_SAMPLES as f64;
                (p * s, d * s)
            }
        }
    }

    pub fn samples(&self, n_t: usize) -> Vec<(Vec3, Vec3)> {
        (0..n_t).map(|i| self.eval(2.0 * PI * i as f64 / n_t as f64)).collect()
    }

    /// Distance between `c(0)` and `c(2 pi)`.
    pub fn closure_gap(&self) -> f64 {
        (self.eval(0.0).0 - self.eval(2.0 * PI).0).norm()
    }
}

/// Homology cycle attached to a boundary component.
#[derive(Clone, Debug, PartialEq)]
pub struct CyclePath {
    pub curve: Curve,
    pub label: Homology,
    pub component: usize,
}

impl CyclePath {
    /// Smallest distance from curve samples to grid nodes.
    pub fn clearance(&self, grid: &SurfaceGrid, n_t: usize) -> f64 {
        let pts = grid.points();
        self.curve
            .samples(n_t)
            .iter()
            .map(|(c, _)| pts.iter().map(|x| (x - c).norm()).fold(f64::INFINITY, f64::min))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Displaced parameter circles: the A-cycle is poloidal, the B-cycle toroidal.
///
/// A positive `eps` displaces outward; the B-cycle may be displaced separately
/// (negative `eps_b` puts it inside the solid torus).
pub fn torus_cycles(surface: &ParamSurface, component: usize, eps_a: f64, eps_b: f64) -> Vec<CyclePath> {
    if surface.genus() == 0 {
        return Vec::new();
    }
    vec![
        CyclePath {
            curve: Curve::Poloidal { surface: surface.clone(), u0: 0.0, eps: eps_a },
            label: Homology::A,
            component,
        },
        CyclePath {
            curve: Curve::Toroidal { surface: surface.clone(), v0: PI, eps: eps_b },
            label: Homology::B,
            component,
        },
    ]
}

/// Periodic trapezoid rule for the circulation of `field` along `cycle`.
pub fn cycle_integral<F>(field: F, cycle: &CyclePath, n_t: usize) -> Result<f64>
where
    F: Fn(Vec3) -> Result<Vec3>,
{
    if n_t == 0 {
        return Err(Error::InvalidGrid("N_t = 0".into()));
    }
    let h = 2.0 * PI / n_t as f64;
    let mut s = 0.0;
    for (c, dc) in cycle.curve.samples(n_t) {
        s += field(c)?.dot(&dc);
    }
    Ok(s * h)
}
