use std::f64::consts::PI;

use rayon::prelude::*;

use super::surface::{ChartPoint, ParamSurface};
use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, lagrange_weights, periodic_diff_matrix, periodic_nodes, trig_weights};
use crate::vec3::Vec3;

/// Stencil size for colatitude interpolation and differentiation on the sphere.
pub const SPHERE_STENCIL: usize = 16;

#[derive(Clone, Debug)]
pub struct GridNode {
    pub u: f64,
    pub v: f64,
    pub chart: ChartPoint,
    pub n: Vec3,
    pub dn_du: Vec3,
    pub dn_dv: Vec3,
    /// `|X_u x X_v|`
    pub jac: f64,
    /// First fundamental form `(E, F, G)`.
    pub metric: [f64; 3],
    /// Mean curvature, positive on the sphere.
    pub mean_curvature: f64,
    pub kappa_max: f64,
}

impl GridNode {
    pub fn x(&self) -> Vec3 {
        self.chart.x
    }
}

/// One entry of a colatitude stencil: source row, half-period longitude shift, weight.
pub type StencilEntry = (usize, bool, f64);

/// Tensor-product Nystrom grid on a parametrized closed surface.
#[derive(Clone, Debug)]
pub struct SurfaceGrid {
    pub surface: ParamSurface,
    pub nu: usize,
    pub nv: usize,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub u_offset: f64,
    pub v_offset: f64,
    /// Parameter-space weights in `u` (uniform for tori, Gauss-derived for the sphere).
    pub param_wu: Vec<f64>,
    pub param_wv: f64,
    pub nodes: Vec<GridNode>,
    weights: Vec<f64>,
    pub area: f64,
    du_stencils: Vec<Vec<StencilEntry>>,
    dv_matrix: Vec<f64>,
}

pub fn sample_grid(surface: &ParamSurface, nu: usize, nv: usize) -> Result<SurfaceGrid> {
    sample_grid_offset(surface, nu, nv, 0.0, 0.0)
}

/// Grid with shifted parameter origins (the sphere ignores `u_offset`).
pub fn sample_grid_offset(
    surface: &ParamSurface,
    nu: usize,
    nv: usize,
    u_offset: f64,
    v_offset: f64,
) -> Result<SurfaceGrid> {
    if nu < 8 || nv < 8 || nu % 2 != 0 || nv % 2 != 0 {
        return Err(Error::InvalidGrid(format!("N_u = {nu}, N_v = {nv}; need even and >= 8")));
    }
    let sphere = surface.is_sphere();
    let (u, param_wu) = if sphere {
        let (t, w) = gauss_legendre(nu);
        // colatitude ascending means cos(theta) descending
        let th: Vec<f64> = (0..nu).map(|i| t[nu - 1 - i].acos()).collect();
        let wu: Vec<f64> = (0..nu).map(|i| w[nu - 1 - i] / th[i].sin()).collect();
        (th, wu)
    } else {
        (periodic_nodes(nu, u_offset), vec![2.0 * PI / nu as f64; nu])
    };
    let v = periodic_nodes(nv, v_offset);
    let param_wv = 2.0 * PI / nv as f64;

    let nodes: Vec<GridNode> = (0..nu * nv)
        .into_par_iter()
        .map(|k| make_node(surface, u[k / nv], v[k % nv]))
        .collect();
    let scale = nodes.iter().map(|n| n.chart.xu.norm().max(n.chart.xv.norm())).fold(0.0, f64::max);
    for nd in &nodes {
        if !(nd.jac > 1e-12 * scale * scale) || !nd.jac.is_finite() {
            return Err(Error::RankDeficient { u: nd.u, v: nd.v });
        }
    }
    let weights: Vec<f64> = nodes
        .iter()
        .enumerate()
        .map(|(k, nd)| nd.jac * param_wu[k / nv] * param_wv)
        .collect();
    let area = weights.iter().sum();

    let du_stencils = if sphere {
        (0..nu)
            .map(|i| {
                let st = colatitude_stencil(&u, u[i], SPHERE_STENCIL);
                let xs: Vec<f64> = st.iter().map(|s| s.2).collect();
                let mut val = vec![0.0; xs.len()];
                let mut der = vec![0.0; xs.len()];
                lagrange_weights(&xs, u[i], &mut val, &mut der);
                st.iter().zip(der).map(|(s, d)| (s.0, s.1, d)).collect()
            })
            .collect()
    } else {
        let d = periodic_diff_matrix(nu);
        (0..nu)
            .map(|i| (0..nu).filter(|&l| l != i).map(|l| (l, false, d[i * nu + l])).collect())
            .collect()
    };

    Ok(SurfaceGrid {
        surface: surface.clone(),
        nu,
        nv,
        u,
        v,
        u_offset: if sphere { 0.0 } else { u_offset },
        v_offset,
        param_wu,
        param_wv,
        nodes,
        weights,
        area,
        du_stencils,
        dv_matrix: periodic_diff_matrix(nv),
    })
}

fn make_node(surface: &ParamSurface, u: f64, v: f64) -> GridNode {
    let c = surface.eval(u, v);
    let nr = c.normal_raw();
    let jac = nr.norm();
    let n = nr / jac;
    let (dn_du, dn_dv) = c.normal_derivatives();
    let e = c.xu.dot(&c.xu);
    let f = c.xu.dot(&c.xv);
    let g = c.xv.dot(&c.xv);
    let l = c.xuu.dot(&n);
    let m = c.xuv.dot(&n);
    let nn = c.xvv.dot(&n);
    let det = e * g - f * f;
    // second fundamental form in an orthonormal tangent frame; avoids the H^2 - K cancellation
    let coords = |t: Vec3| {
        let (a, b) = (t.dot(&c.xu), t.dot(&c.xv));
        ((g * a - f * b) / det, (e * b - f * a) / det)
    };
    let e1 = c.xu.normalize();
    let (p1, q1) = coords(e1);
    let (p2, q2) = coords(n.cross(&e1));
    let ii = |p: f64, q: f64, r: f64, s: f64| l * p * r + m * (p * s + q * r) + nn * q * s;
    let (a11, a12, a22) = (ii(p1, q1, p1, q1), ii(p1, q1, p2, q2), ii(p2, q2, p2, q2));
    let disc = (0.5 * (a11 - a22)).hypot(a12);
    let hs = 0.5 * (a11 + a22);
    GridNode {
        u,
        v,
        chart: c,
        n,
        dn_du,
        dn_dv,
        jac,
        metric: [e, f, g],
        mean_curvature: -hs,
        kappa_max: (hs + disc).abs().max((hs - disc).abs()),
    }
}

/// `p` nearest colatitude nodes to `th` on the pole-reflected extension.
///
/// Reflected entries correspond to the same geometric point at longitude
/// shifted by `pi`; the returned triple is `(row, shifted, extended_theta)`.
pub fn colatitude_stencil(thetas: &[f64], th: f64, p: usize) -> Vec<(usize, bool, f64)> {
    let n = thetas.len() as i64;
    let ext = |e: i64| -> (usize, bool, f64) {
        if e < 0 {
            let s = (-1 - e) as usize;
            (s, true, -thetas[s])
        } else if e >= n {
            let s = (2 * n - 1 - e) as usize;
            (s, true, 2.0 * PI - thetas[s])
        } else {
            (e as usize, false, thetas[e as usize])
        }
    };
    // first extended index with theta >= th
    let mut lo = -n;
    let mut hi = 2 * n;
    while lo < hi {
        let mid = (lo + hi).div_euclid(2);
        if ext(mid).2 < th {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    let start = (lo - p as i64 / 2).clamp(-n, 2 * n - p as i64);
    (start..start + p as i64).map(ext).collect()
}

impl SurfaceGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.nv + j
    }

    pub fn points(&self) -> Vec<Vec3> {
        self.nodes.iter().map(|n| n.chart.x).collect()
    }

    pub fn normals(&self) -> Vec<Vec3> {
        self.nodes.iter().map(|n| n.n).collect()
    }

    /// Grid spacing in `u` (mean, for the sphere).
    pub fn hu(&self) -> f64 {
        if self.surface.is_sphere() {
            PI / self.nu as f64
        } else {
            2.0 * PI / self.nu as f64
        }
    }

    pub fn hv(&self) -> f64 {
        2.0 * PI / self.nv as f64
    }

    /// Largest physical distance between neighbouring nodes.
    pub fn max_spacing(&self) -> f64 {
        self.nodes
            .iter()
            .map(|n| (n.chart.xu.norm() * self.hu()).max(n.chart.xv.norm() * self.hv()))
            .fold(0.0, f64::max)
    }

    pub fn colatitude_stencil(&self, th: f64) -> Vec<(usize, bool, f64)> {
        colatitude_stencil(&self.u, th, SPHERE_STENCIL)
    }

    /// Interpolates a nodal field to the nodes of another grid on the same surface.
    pub fn resample(&self, f: &[f64], target: &SurfaceGrid) -> Vec<f64> {
        let (nu, nv) = (self.nu, self.nv);
        // longitude interpolation of every source row at every target longitude
        let mut wv = vec![0.0; nv];
        let mut rows = vec![0.0; nu * target.nv];
        for (b, &v) in target.v.iter().enumerate() {
            trig_weights(nv, self.v_offset, v, &mut wv);
            for i in 0..nu {
                rows[i * target.nv + b] = (0..nv).map(|j| wv[j] * f[i * nv + j]).sum();
            }
        }
        let mut out = vec![0.0; target.len()];
        if self.surface.is_sphere() {
            // the half-period shift needs longitudes v + pi as well
            let mut shifted = vec![0.0; nu * target.nv];
            for (b, &v) in target.v.iter().enumerate() {
                trig_weights(nv, self.v_offset, v + PI, &mut wv);
                for i in 0..nu {
                    shifted[i * target.nv + b] = (0..nv).map(|j| wv[j] * f[i * nv + j]).sum();
                }
            }
            let mut val = vec![0.0; SPHERE_STENCIL];
            let mut der = vec![0.0; SPHERE_STENCIL];
            for (a, &th) in target.u.iter().enumerate() {
                let st = self.colatitude_stencil(th);
                let xs: Vec<f64> = st.iter().map(|s| s.2).collect();
                lagrange_weights(&xs, th, &mut val, &mut der);
                for b in 0..target.nv {
                    out[a * target.nv + b] = st
                        .iter()
                        .zip(&val)
                        .map(|(&(src, sh, _), w)| w * if sh { shifted[src * target.nv + b] } else { rows[src * target.nv + b] })
                        .sum();
                }
            }
        } else {
            let mut wu = vec![0.0; nu];
            for (a, &u) in target.u.iter().enumerate() {
                trig_weights(nu, self.u_offset, u, &mut wu);
                for b in 0..target.nv {
                    out[a * target.nv + b] = (0..nu).map(|i| wu[i] * rows[i * target.nv + b]).sum();
                }
            }
        }
        out
    }

    /// Derivative in `u` of a grid function that is smooth on the embedded surface.
    pub fn diff_u(&self, f: &[f64]) -> Vec<f64> {
        let (nu, nv) = (self.nu, self.nv);
        let half = nv / 2;
        let mut out = vec![0.0; nu * nv];
        for i in 0..nu {
            for &(src, shifted, w) in &self.du_stencils[i] {
                let row = &f[src * nv..(src + 1) * nv];
                let o = &mut out[i * nv..(i + 1) * nv];
                if shifted {
                    for j in 0..nv {
                        o[j] += w * row[(j + half) % nv];
                    }
                } else {
                    for j in 0..nv {
                        o[j] += w * row[j];
                    }
                }
            }
        }
        out
    }

    pub fn diff_v(&self, f: &[f64]) -> Vec<f64> {
        let nv = self.nv;
        let d = &self.dv_matrix;
        let mut out = vec![0.0; f.len()];
        for (o, row) in out.chunks_mut(nv).zip(f.chunks(nv)) {
            for j in 0..nv {
                o[j] = (0..nv).map(|l| d[j * nv + l] * row[l]).sum();
            }
        }
        out
    }

    /// Parameter derivatives of a Cartesian vector field sampled on the grid.
    pub fn diff_vec(&self, f: &[Vec3]) -> (Vec<Vec3>, Vec<Vec3>) {
        let mut du = vec![Vec3::zeros(); f.len()];
        let mut dv = vec![Vec3::zeros(); f.len()];
        for c in 0..3 {
            let comp: Vec<f64> = f.iter().map(|x| x[c]).collect();
            let a = self.diff_u(&comp);
            let b = self.diff_v(&comp);
            for k in 0..f.len() {
                du[k][c] = a[k];
                dv[k][c] = b[k];
            }
        }
        (du, dv)
    }

    /// Tangential gradient `g^{ab} d_a f X_b` of a scalar grid function.
    pub fn surface_gradient(&self, f: &[f64]) -> Vec<Vec3> {
        let fu = self.diff_u(f);
        let fv = self.diff_v(f);
        self.nodes
            .iter()
            .enumerate()
            .map(|(k, nd)| {
                let [e, ff, g] = nd.metric;
                let det = e * g - ff * ff;
                let a = (g * fu[k] - ff * fv[k]) / det;
                let b = (e * fv[k] - ff * fu[k]) / det;
                nd.chart.xu * a + nd.chart.xv * b
            })
            .collect()
    }

    /// Weighted mean of a grid function.
    pub fn mean(&self, f: &[f64]) -> f64 {
        self.weights.iter().zip(f).map(|(w, x)| w * x).sum::<f64>() / self.area
    }

    /// Weighted L2 norm.
    pub fn l2(&self, f: &[f64]) -> f64 {
        self.weights.iter().zip(f).map(|(w, x)| w * x * x).sum::<f64>().sqrt()
    }

    pub fn l2_vec(&self, f: &[Vec3]) -> f64 {
        self.weights.iter().zip(f).map(|(w, x)| w * x.norm_squared()).sum::<f64>().sqrt()
    }

    /// Signed volume `(1/3) int x . n dS`.
    pub fn enclosed_volume(&self) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(nd, w)| w * nd.chart.x.dot(&nd.n)).sum::<f64>() / 3.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::surface::{build_surface, SurfaceParams};

    fn torus21() -> ParamSurface {
        ParamSurface::TorusRev { major: 2.0, minor: 1.0 }
    }

    #[test]
    fn areas_converge_to_closed_forms() {
        let s = sample_grid(&ParamSurface::Sphere { radius: 1.0 }, 64, 64).unwrap();
        assert!((s.area - 4.0 * PI).abs() < 1e-12 * 4.0 * PI);
        let t = sample_grid(&torus21(), 64, 64).unwrap();
        let exact = 4.0 * PI * PI * 2.0;
        assert!((t.area - exact).abs() < 1e-10 * exact);
        let z2: f64 = s.nodes.iter().zip(s.weights()).map(|(n, w)| w * n.chart.x.z.powi(2)).sum();
        assert!((z2 - 4.0 * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn normals_are_unit_and_outward() {
        for surf in [
            ParamSurface::Sphere { radius: 1.0 },
            torus21(),
            build_surface("twisted_torus", &SurfaceParams::default()).unwrap(),
        ] {
            let g = sample_grid(&surf, 16, 16).unwrap();
            assert!(g.nodes.iter().all(|n| (n.n.norm() - 1.0).abs() < 1e-12));
            assert!(g.enclosed_volume() > 0.0);
        }
        let s = sample_grid(&ParamSurface::Sphere { radius: 1.0 }, 16, 16).unwrap();
        assert!(s.nodes.iter().all(|n| n.n.dot(&n.chart.x) > 0.0));
        let t = sample_grid(&torus21(), 16, 16).unwrap();
        assert!((t.nodes[0].n - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn rejects_odd_or_small_grids() {
        assert!(sample_grid(&torus21(), 7, 16).is_err());
        assert!(sample_grid(&torus21(), 6, 16).is_err());
        assert!(sample_grid(&torus21(), 16, 15).is_err());
    }

    #[test]
    fn resample_reproduces_smooth_fields() {
        let f = |p: Vec3| p.x + p.z * p.z * p.y - 0.3 * p.y * p.x;
        for (surf, n0, n1) in [(ParamSurface::Sphere { radius: 1.0 }, 24, 40), (torus21(), 24, 40)] {
            let a = sample_grid(&surf, n0, n0).unwrap();
            let b = sample_grid(&surf, n1, n1 + 2).unwrap();
            let fa: Vec<f64> = a.nodes.iter().map(|n| f(n.chart.x)).collect();
            let fb = a.resample(&fa, &b);
            for (k, n) in b.nodes.iter().enumerate() {
                assert!((fb[k] - f(n.chart.x)).abs() < 1e-9, "{} at {k}", surf.tag());
            }
        }
    }

    #[test]
    fn sphere_derivatives_cross_the_pole() {
        let s = sample_grid(&ParamSurface::Sphere { radius: 1.0 }, 32, 32).unwrap();
        // f = x + z^2 y, smooth on the sphere
        let f: Vec<f64> = s.nodes.iter().map(|n| n.chart.x.x + n.chart.x.z.powi(2) * n.chart.x.y).collect();
        let fu = s.diff_u(&f);
        let fv = s.diff_v(&f);
        for (k, n) in s.nodes.iter().enumerate() {
            let p = n.chart.x;
            let grad = Vec3::new(1.0, p.z * p.z, 2.0 * p.z * p.y);
            assert!((fu[k] - grad.dot(&n.chart.xu)).abs() < 1e-9, "u at {k}");
            assert!((fv[k] - grad.dot(&n.chart.xv)).abs() < 1e-12, "v at {k}");
        }
    }

    #[test]
    fn mean_curvature_of_sphere_and_torus() {
        let s = sample_grid(&ParamSurface::Sphere { radius: 2.0 }, 8, 8).unwrap();
        assert!(s.nodes.iter().all(|n| (n.mean_curvature - 0.5).abs() < 1e-12));
        let t = sample_grid(&torus21(), 8, 8).unwrap();
        assert!(t.nodes.iter().all(|n| (n.kappa_max - 1.0).abs() < 1e-12));
    }
}
