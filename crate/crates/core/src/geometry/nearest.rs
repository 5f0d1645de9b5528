use super::grid::SurfaceGrid;
use super::reach::estimate_reach;
use super::surface::ParamSurface;
use crate::error::{Error, Result};
use crate::vec3::Vec3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NearestPoint {
    pub u: f64,
    pub v: f64,
    pub foot: Vec3,
    /// Signed distance, negative inside.
    pub rho: f64,
}

/// Nearest-point map of a gridded surface, valid inside its reach.
#[derive(Clone, Debug)]
pub struct NearestPointMap<'a> {
    pub grid: &'a SurfaceGrid,
    pub reach: f64,
    pub starts: usize,
}

impl<'a> NearestPointMap<'a> {
    pub fn new(grid: &'a SurfaceGrid) -> Self {
        Self { grid, reach: estimate_reach(grid), starts: 4 }
    }

    pub fn with_reach(grid: &'a SurfaceGrid, reach: f64) -> Self {
        Self { grid, reach, starts: 4 }
    }

    pub fn project(&self, x: Vec3) -> Result<NearestPoint> {
        nearest_point(self.grid, x, self.reach, self.starts)
    }
}

/// Foot point, parameters and signed distance of `x`.
///
/// Newton on `|X(u, v) - x|^2 / 2` from the `starts` closest grid nodes.
pub fn nearest_point(grid: &SurfaceGrid, x: Vec3, reach: f64, starts: usize) -> Result<NearestPoint> {
    if let ParamSurface::Sphere { radius } = grid.surface {
        let r = x.norm();
        if r == 0.0 || (r - radius).abs() >= reach {
            return Err(Error::BeyondReach { distance: (r - radius).abs(), reach });
        }
        let th = (x.z / r).clamp(-1.0, 1.0).acos();
        let ph = x.y.atan2(x.x).rem_euclid(2.0 * std::f64::consts::PI);
        return Ok(NearestPoint { u: th, v: ph, foot: x * (radius / r), rho: r - radius });
    }
    let mut order: Vec<(f64, usize)> =
        grid.nodes.iter().enumerate().map(|(k, n)| ((n.chart.x - x).norm_squared(), k)).collect();
    let take = starts.max(1).min(order.len());
    order.select_nth_unstable_by(take - 1, |a, b| a.0.total_cmp(&b.0));
    let mut best: Option<NearestPoint> = None;
    let mut last_err = None;
    for &(_, k) in order.iter().take(take) {
        let nd = &grid.nodes[k];
        match newton(&grid.surface, x, nd.u, nd.v) {
            Ok(p) => {
                if best.is_none_or(|b| p.rho.abs() < b.rho.abs()) {
                    best = Some(p);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    let p = best.ok_or_else(|| last_err.unwrap_or(Error::NewtonFailed("no start".into())))?;
    if p.rho.abs() >= reach {
        return Err(Error::BeyondReach { distance: p.rho.abs(), reach });
    }
    Ok(p)
}

fn newton(s: &ParamSurface, x: Vec3, mut u: f64, mut v: f64) -> Result<NearestPoint> {
    let obj = |u: f64, v: f64| 0.5 * (s.point(u, v) - x).norm_squared();
    for _ in 0..100 {
        let c = s.eval(u, v);
        let d = c.x - x;
        let gu = d.dot(&c.xu);
        let gv = d.dot(&c.xv);
        let scale = 1.0 + d.norm();
        if gu.abs() <= 1e-13 * scale * c.xu.norm() && gv.abs() <= 1e-13 * scale * c.xv.norm() {
            let n = c.normal();
            let dist = d.norm();
            let sign = if (-d).dot(&n) >= 0.0 { 1.0 } else { -1.0 };
            return Ok(NearestPoint { u, v, foot: c.x, rho: sign * dist });
        }
        let (a, b, cc) = (c.xu.dot(&c.xu), c.xu.dot(&c.xv), c.xv.dot(&c.xv));
        let mut h = [a + d.dot(&c.xuu), b + d.dot(&c.xuv), cc + d.dot(&c.xvv)];
        if h[0] <= 0.0 || h[0] * h[2] - h[1] * h[1] <= 0.0 {
            h = [a, b, cc];
        }
        let det = h[0] * h[2] - h[1] * h[1];
        let su = -(h[2] * gu - h[1] * gv) / det;
        let sv = -(h[0] * gv - h[1] * gu) / det;
        let f0 = obj(u, v);
        let mut t = 1.0;
        loop {
            if obj(u + t * su, v + t * sv) <= f0 || t < 1e-6 {
                break;
            }
            t *= 0.5;
        }
        u += t * su;
        v += t * sv;
    }
    Err(Error::NewtonFailed(format!("x = ({:.6}, {:.6}, {:.6})", x.x, x.y, x.z)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::sample_grid;
    use crate::vec3::vec3;

    #[test]
    fn sphere_and_torus_examples() {
        let s = sample_grid(&ParamSurface::Sphere { radius: 1.0 }, 16, 16).unwrap();
        let p = nearest_point(&s, vec3(0.0, 0.0, 2.0), 1.5, 4).unwrap();
        assert!((p.foot - vec3(0.0, 0.0, 1.0)).norm() < 1e-15 && (p.rho - 1.0).abs() < 1e-15);
        let t = sample_grid(&ParamSurface::TorusRev { major: 2.0, minor: 1.0 }, 32, 16).unwrap();
        let p = nearest_point(&t, vec3(2.0, 0.0, 0.5), 1.0, 4).unwrap();
        assert!((p.foot - vec3(2.0, 0.0, 1.0)).norm() < 1e-10);
        assert!((p.rho + 0.5).abs() < 1e-12);
    }

    #[test]
    fn nodes_map_to_themselves() {
        let t = sample_grid(&crate::geometry::build_surface("twisted_torus", &Default::default()).unwrap(), 32, 16)
            .unwrap();
        for nd in t.nodes.iter().step_by(37) {
            let p = nearest_point(&t, nd.chart.x, 0.5, 4).unwrap();
            assert!(p.rho.abs() < 1e-12 && (p.foot - nd.chart.x).norm() < 1e-12);
        }
    }

    #[test]
    fn beyond_reach_is_reported() {
        let s = sample_grid(&ParamSurface::Sphere { radius: 1.0 }, 16, 16).unwrap();
        assert!(matches!(
            nearest_point(&s, vec3(0.0, 0.0, 0.01), 0.9, 4),
            Err(Error::BeyondReach { .. })
        ));
    }
}
