//! On-surface quadrature for the weakly singular kernels of `S`, `D` and `S'`.
//!
//! Tori: floating partition of unity. A polar patch in scaled parameter
//! coordinates around the target carries `eta`; `1 - eta` is summed on an
//! `upsample`-fold refined tensor grid, since the plain trapezoid rule
//! resolves the window only at a fixed number of cells per patch. Density
//! reaches both auxiliary node sets by global trigonometric interpolation.
//!
//! Sphere: a global polar rule about the target (rotated pole), with density
//! interpolated by local Lagrange in colatitude across the poles and global
//! trigonometric interpolation in longitude.

use std::f64::consts::PI;

use faer::Mat;

use super::{gauss_legendre, lagrange_weights, trig_weights, Rule1D};
use crate::error::{Error, Result};
use crate::geometry::{ParamSurface, SurfaceGrid};
use crate::vec3::Vec3;

const FOUR_PI: f64 = 4.0 * PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KernelKind {
    S,
    D,
    SPrime,
}

/// Singular-rule parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingularParams {
    /// Patch half-width in grid spacings.
    pub patch_cells: f64,
    pub n_radial: usize,
    pub n_angular: usize,
    pub sphere_n_polar: usize,
    pub sphere_n_azimuth: usize,
    /// Refinement factor of the far-field grid on tori.
    pub upsample: usize,
}

impl Default for SingularParams {
    fn default() -> Self {
        Self { patch_cells: 6.0, n_radial: 48, n_angular: 64, sphere_n_polar: 48, sphere_n_azimuth: 64, upsample: 6 }
    }
}

/// `1 / (4 pi |x - y|)`
#[inline]
pub fn kernel_s(x: &Vec3, y: &Vec3) -> f64 {
    1.0 / (FOUR_PI * (x - y).norm())
}

/// `n(y) . (x - y) / (4 pi |x - y|^3)`
#[inline]
pub fn kernel_d(x: &Vec3, y: &Vec3, ny: &Vec3) -> f64 {
    let r = x - y;
    let d = r.norm();
    ny.dot(&r) / (FOUR_PI * d * d * d)
}

/// `-n(x) . (x - y) / (4 pi |x - y|^3)`
#[inline]
pub fn kernel_sp(x: &Vec3, nx: &Vec3, y: &Vec3) -> f64 {
    let r = x - y;
    let d = r.norm();
    -nx.dot(&r) / (FOUR_PI * d * d * d)
}

/// Partition-of-unity window: 1 at the target, 0 at and beyond the patch edge.
#[inline]
pub fn window(t: f64) -> f64 {
    if t <= 0.0 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        (2.0 * (-1.0 / t).exp() / (t - 1.0)).exp()
    }
}

/// Dense quadrature rows of the three operators for one target node.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularRow {
    pub s: Vec<f64>,
    pub d: Vec<f64>,
    pub sp: Vec<f64>,
}

impl SingularRow {
    pub fn get(&self, k: KernelKind) -> &[f64] {
        match k {
            KernelKind::S => &self.s,
            KernelKind::D => &self.d,
            KernelKind::SPrime => &self.sp,
        }
    }
}

/// Patch half-widths `(h_u, h_v)` in parameter units.
pub fn patch_widths(grid: &SurfaceGrid, p: &SingularParams) -> Result<(f64, f64)> {
    let pick = |n: usize| -> Result<f64> {
        let h = 2.0 * PI / n as f64;
        let mut m = p.patch_cells;
        while m * h > 0.5 * PI && m > 1.0 {
            m *= 0.5;
        }
        if m * h > PI {
            return Err(Error::PatchTooWide(format!("{m} cells of {h:.4}")));
        }
        Ok(m * h)
    };
    Ok((pick(grid.nu)?, pick(grid.nv)?))
}

/// Refined tensor grid carrying the far field on tori.
#[derive(Clone, Debug)]
pub(crate) struct FineGrid {
    pub(crate) fu: usize,
    pub(crate) fv: usize,
    pub(crate) x: Vec<Vec3>,
    pub(crate) n: Vec<Vec3>,
    /// Area weights of the refined trapezoid rule.
    pub(crate) w: Vec<f64>,
    /// `fu x nu` and `fv x nv` interpolation matrices.
    pub(crate) wu: Mat<f64>,
    pub(crate) wv: Mat<f64>,
}

impl FineGrid {
    pub(crate) fn new(grid: &SurfaceGrid, factor: usize) -> Self {
        let (fu, fv) = (grid.nu * factor.max(1), grid.nv * factor.max(1));
        let (hu, hv) = (2.0 * PI / fu as f64, 2.0 * PI / fv as f64);
        let mut x = Vec::with_capacity(fu * fv);
        let mut n = Vec::with_capacity(fu * fv);
        let mut w = Vec::with_capacity(fu * fv);
        for a in 0..fu {
            for b in 0..fv {
                let c = grid.surface.eval(grid.u_offset + hu * a as f64, grid.v_offset + hv * b as f64);
                let nr = c.normal_raw();
                let jac = nr.norm();
                x.push(c.x);
                n.push(nr / jac);
                w.push(jac * hu * hv);
            }
        }
        let interp = |nf: usize, nc: usize, x0: f64, h: f64| {
            let mut m = Mat::<f64>::zeros(nf, nc);
            let mut buf = vec![0.0; nc];
            for a in 0..nf {
                trig_weights(nc, x0, x0 + h * a as f64, &mut buf);
                for (l, &v) in buf.iter().enumerate() {
                    m[(a, l)] = v;
                }
            }
            m
        };
        Self {
            fu,
            fv,
            x,
            n,
            w,
            wu: interp(fu, grid.nu, grid.u_offset, hu),
            wv: interp(fv, grid.nv, grid.v_offset, hv),
        }
    }
}

/// Row builder with the per-grid precomputation shared across targets.
#[derive(Clone, Debug)]
pub struct SingularRule<'a> {
    pub grid: &'a SurfaceGrid,
    pub params: SingularParams,
    fine: Option<FineGrid>,
}

impl<'a> SingularRule<'a> {
    pub fn new(grid: &'a SurfaceGrid, params: &SingularParams) -> Result<Self> {
        let fine = if grid.surface.is_sphere() {
            None
        } else {
            patch_widths(grid, params)?;
            Some(FineGrid::new(grid, params.upsample))
        };
        Ok(Self { grid, params: *params, fine })
    }

    /// Quadrature rows for target node `target`.
    pub fn row(&self, target: usize) -> Result<SingularRow> {
        match &self.fine {
            None => Ok(sphere_row(self.grid, target, &self.params)),
            Some(fine) => torus_row(self.grid, fine, target, &self.params),
        }
    }
}

/// Quadrature rows for target node `target`.
pub fn singular_row(grid: &SurfaceGrid, target: usize, p: &SingularParams) -> Result<SingularRow> {
    SingularRule::new(grid, p)?.row(target)
}

/// Applies one on-surface operator to `density` at node `target`.
pub fn singular_apply(
    grid: &SurfaceGrid,
    kernel: KernelKind,
    density: &[f64],
    target: usize,
    p: &SingularParams,
) -> Result<f64> {
    if density.len() != grid.len() {
        return Err(Error::GridMismatch(format!("density {} vs grid {}", density.len(), grid.len())));
    }
    let row = singular_row(grid, target, p)?;
    Ok(row.get(kernel).iter().zip(density).map(|(a, b)| a * b).sum())
}

fn torus_row(grid: &SurfaceGrid, fine: &FineGrid, target: usize, p: &SingularParams) -> Result<SingularRow> {
    let (hu, hv) = patch_widths(grid, p)?;
    let n = grid.len();
    let (nu, nv) = (grid.nu, grid.nv);
    let t = &grid.nodes[target];
    let (x, nx) = (t.chart.x, t.n);

    // far field: (1 - eta) K on the refined grid, pulled back by W_u^T C W_v
    let (fu, fv) = (fine.fu, fine.fv);
    let (dfu, dfv) = (2.0 * PI / fu as f64, 2.0 * PI / fv as f64);
    let (ti, tj) = (target / nv * (fu / nu), target % nv * (fv / nv));
    let mut cs = Mat::<f64>::zeros(fu, fv);
    let mut cd = Mat::<f64>::zeros(fu, fv);
    let mut csp = Mat::<f64>::zeros(fu, fv);
    let signed = |a: usize, t: usize, m: usize| -> f64 {
        let d = (a + m - t) % m;
        if 2 * d >= m {
            d as f64 - m as f64
        } else {
            d as f64
        }
    };
    for a in 0..fu {
        let da = signed(a, ti, fu) * dfu / hu;
        for b in 0..fv {
            let db = signed(b, tj, fv) * dfv / hv;
            let c = 1.0 - window((da * da + db * db).sqrt());
            if c == 0.0 {
                continue;
            }
            let k = a * fv + b;
            let (y, ny) = (fine.x[k], fine.n[k]);
            let cw = c * fine.w[k];
            cs[(a, b)] = cw * kernel_s(&x, &y);
            cd[(a, b)] = cw * kernel_d(&x, &y, &ny);
            csp[(a, b)] = cw * kernel_sp(&x, &nx, &y);
        }
    }
    let pull = |c: &Mat<f64>| fine.wu.transpose() * c * &fine.wv;
    let (fs, fd, fsp) = (pull(&cs), pull(&cd), pull(&csp));
    let mut row = SingularRow {
        s: (0..n).map(|k| fs[(k / nv, k % nv)]).collect(),
        d: (0..n).map(|k| fd[(k / nv, k % nv)]).collect(),
        sp: (0..n).map(|k| fsp[(k / nv, k % nv)]).collect(),
    };

    let radial = Rule1D::gauss(p.n_radial, 0.0, 1.0);
    let na = p.n_angular;
    let np = radial.len() * na;
    // column per polar node keeps the fills contiguous
    let mut a_mat = Mat::<f64>::zeros(3 * nu, np);
    let mut b_mat = Mat::<f64>::zeros(nv, np);
    let mut wu = vec![0.0; nu];
    let mut wv = vec![0.0; nv];
    let dalpha = 2.0 * PI / na as f64;
    for (ir, (&r, &wr)) in radial.nodes.iter().zip(&radial.weights).enumerate() {
        let eta = window(r);
        for ia in 0..na {
            let al = dalpha * ia as f64;
            let (sa, ca) = al.sin_cos();
            let u = t.u + hu * r * ca;
            let v = t.v + hv * r * sa;
            let c = grid.surface.eval(u, v);
            let nr = c.normal_raw();
            let jac = nr.norm();
            let ny = nr / jac;
            let cw = wr * dalpha * hu * hv * r * jac * eta;
            let ks = cw * kernel_s(&x, &c.x);
            let kd = cw * kernel_d(&x, &c.x, &ny);
            let ksp = cw * kernel_sp(&x, &nx, &c.x);
            trig_weights(nu, grid.u_offset, u, &mut wu);
            trig_weights(nv, grid.v_offset, v, &mut wv);
            let q = ir * na + ia;
            let col = a_mat.col_mut(q).try_as_col_major_mut().expect("contiguous column").as_slice_mut();
            for l in 0..nu {
                col[l] = ks * wu[l];
                col[nu + l] = kd * wu[l];
                col[2 * nu + l] = ksp * wu[l];
            }
            b_mat.col_mut(q).try_as_col_major_mut().expect("contiguous column").as_slice_mut().copy_from_slice(&wv);
        }
    }
    let near = &a_mat * b_mat.transpose();
    for i in 0..nu {
        for j in 0..nv {
            let k = i * nv + j;
            row.s[k] += near[(i, j)];
            row.d[k] += near[(nu + i, j)];
            row.sp[k] += near[(2 * nu + i, j)];
        }
    }
    Ok(row)
}

fn sphere_row(grid: &SurfaceGrid, target: usize, p: &SingularParams) -> SingularRow {
    let radius = match grid.surface {
        ParamSurface::Sphere { radius } => radius,
        _ => unreachable!("sphere rule on a non-sphere"),
    };
    let n = grid.len();
    let nv = grid.nv;
    let t = &grid.nodes[target];
    let e3 = t.n;
    let e1 = t.chart.xu.normalize();
    let e2 = e3.cross(&e1);
    let x = t.chart.x;

    let (gx, gw) = gauss_legendre(p.sphere_n_polar);
    let nphi = p.sphere_n_azimuth;
    let dphi = 2.0 * PI / nphi as f64;
    let mut row = SingularRow { s: vec![0.0; n], d: vec![0.0; n], sp: vec![0.0; n] };
    let mut wv = vec![0.0; nv];
    let mut lv = vec![0.0; crate::geometry::grid::SPHERE_STENCIL];
    let mut ld = lv.clone();
    for (&g, &gwi) in gx.iter().zip(&gw) {
        let thp = 0.5 * PI * (g + 1.0);
        let wth = 0.5 * PI * gwi;
        let (st, ct) = thp.sin_cos();
        for q in 0..nphi {
            let (sp, cp) = (dphi * q as f64).sin_cos();
            let dir = e1 * (st * cp) + e2 * (st * sp) + e3 * ct;
            let y = dir * radius;
            let cw = wth * dphi * radius * radius * st;
            let ks = cw * kernel_s(&x, &y);
            let kd = cw * kernel_d(&x, &y, &dir);
            let ksp = cw * kernel_sp(&x, &e3, &y);

            let th_y = dir.z.clamp(-1.0, 1.0).acos();
            let ph_y = dir.y.atan2(dir.x);
            let stencil = grid.colatitude_stencil(th_y);
            let xs: Vec<f64> = stencil.iter().map(|s| s.2).collect();
            lagrange_weights(&xs, th_y, &mut lv, &mut ld);
            for (shift, phase) in [(false, 0.0), (true, PI)] {
                if !stencil.iter().any(|s| s.1 == shift) {
                    continue;
                }
                trig_weights(nv, grid.v_offset, ph_y + phase, &mut wv);
                for (l, &(src, sh, _)) in stencil.iter().enumerate() {
                    if sh != shift {
                        continue;
                    }
                    let base = src * nv;
                    let (a_s, a_d, a_sp) = (ks * lv[l], kd * lv[l], ksp * lv[l]);
                    for (j, &wj) in wv.iter().enumerate() {
                        row.s[base + j] += a_s * wj;
                        row.d[base + j] += a_d * wj;
                        row.sp[base + j] += a_sp * wj;
                    }
                }
            }
        }
    }
    row
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::sample_grid;

    #[test]
    fn window_is_a_partition_profile() {
        assert_eq!(window(0.0), 1.0);
        assert_eq!(window(1.0), 0.0);
        let mut prev = 1.0;
        for i in 1..100 {
            let w = window(i as f64 / 100.0);
            assert!(w <= prev && w >= 0.0);
            prev = w;
        }
    }

    #[test]
    fn sphere_identities_at_a_node() {
        let g = sample_grid(&ParamSurface::Sphere { radius: 1.0 }, 24, 24).unwrap();
        let p = SingularParams::default();
        let ones = vec![1.0; g.len()];
        for k in [0usize, 37, 300] {
            let s = singular_apply(&g, KernelKind::S, &ones, k, &p).unwrap();
            let d = singular_apply(&g, KernelKind::D, &ones, k, &p).unwrap();
            let sp = singular_apply(&g, KernelKind::SPrime, &ones, k, &p).unwrap();
            assert!((s - 1.0).abs() < 1e-12, "{s}");
            assert!((d + 0.5).abs() < 1e-12, "{d}");
            assert!((sp + 0.5).abs() < 1e-12, "{sp}");
        }
    }

    #[test]
    fn torus_gauss_identity_at_a_node() {
        let g = sample_grid(&ParamSurface::TorusRev { major: 2.0, minor: 1.0 }, 48, 32).unwrap();
        let p = SingularParams::default();
        let ones = vec![1.0; g.len()];
        for k in [0usize, 500, 1000] {
            let d = singular_apply(&g, KernelKind::D, &ones, k, &p).unwrap();
            assert!((d + 0.5).abs() < 1e-7, "k={k} D[1]={d}");
        }
    }

    #[test]
    fn grid_mismatch_is_an_error() {
        let g = sample_grid(&ParamSurface::Sphere { radius: 1.0 }, 8, 8).unwrap();
        assert!(matches!(
            singular_apply(&g, KernelKind::S, &[1.0; 3], 0, &SingularParams::default()),
            Err(Error::GridMismatch(_))
        ));
    }
}
