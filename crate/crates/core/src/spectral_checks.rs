//! Spectra of `S'` on one or two boundary components and the induced
//! values of the operators `B` and the thin-shell operator.
//!
//! `S'` is self-adjoint in the inner product `<a, b>_S = int a S b` because
//! `S S' = D S`, so the spectrum is taken from the symmetric pencil
//! `(W S S', W S)` with `W` the quadrature weights.
//!
//! Nystrom matrices are only accurate on modes the grid resolves: near the
//! Nyquist band `W S` loses definiteness. The pencil is therefore reduced by
//! Rayleigh-Ritz onto a band-limited subspace (Fourier modes on tori,
//! spherical harmonics on the sphere). Since `S'` is `S`-self-adjoint, the
//! Ritz values stay inside the hull of the true spectrum.

use faer::Mat;

use crate::error::{Error, Result};
use crate::geometry::{sample_grid_offset, ParamSurface, SurfaceGrid};
use crate::layer_potentials::{assemble, cross_blocks_refined, eval_s, OperatorSet};
use crate::linalg::{self, Dense};
use crate::quadrature::SingularParams;
use crate::vec3::Vec3;

/// Default fraction of each grid direction's Nyquist band kept in the Ritz subspace.
pub const DEFAULT_BAND: f64 = 2.0 / 3.0;

/// Band-limited grid functions, one column each.
pub fn smooth_basis(grid: &SurfaceGrid, band: f64) -> Dense {
    let mut cols: Vec<Vec<f64>> = Vec::new();
    match grid.surface {
        ParamSurface::Sphere { .. } => {
            let lmax = (band * grid.nu.min(grid.nv / 2) as f64).floor() as usize;
            let plm: Vec<Vec<Vec<f64>>> = grid.nodes.iter().map(|nd| legendre_table(nd.u.cos(), lmax)).collect();
            for l in 0..=lmax {
                for m in 0..=l {
                    let p: Vec<f64> = plm.iter().map(|t| t[m][l - m]).collect();
                    cols.push(grid.nodes.iter().zip(&p).map(|(nd, p)| p * (m as f64 * nd.v).cos()).collect());
                    if m > 0 {
                        cols.push(grid.nodes.iter().zip(&p).map(|(nd, p)| p * (m as f64 * nd.v).sin()).collect());
                    }
                }
            }
        }
        _ => {
            let ku = (band * (grid.nu / 2) as f64).floor() as i64;
            let kv = (band * (grid.nv / 2) as f64).floor() as i64;
            for a in 0..=ku {
                for b in -kv..=kv {
                    if a == 0 && b < 0 {
                        continue;
                    }
                    let phase = |k: usize| a as f64 * grid.nodes[k].u + b as f64 * grid.nodes[k].v;
                    cols.push((0..grid.len()).map(|k| phase(k).cos()).collect());
                    if a != 0 || b != 0 {
                        cols.push((0..grid.len()).map(|k| phase(k).sin()).collect());
                    }
                }
            }
        }
    }
    // unit weighted norm keeps the reduced pencil well scaled
    let w = grid.weights();
    for c in cols.iter_mut() {
        let nrm = c.iter().zip(w).map(|(x, w)| w * x * x).sum::<f64>().sqrt();
        c.iter_mut().for_each(|x| *x /= nrm);
    }
    Mat::from_fn(grid.len(), cols.len(), |i, j| cols[j][i])
}

/// Normalized associated Legendre values, indexed `[m][l - m]` for `l <= lmax`.
fn legendre_table(x: f64, lmax: usize) -> Vec<Vec<f64>> {
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut out = Vec::with_capacity(lmax + 1);
    let mut pmm = (1.0 / (4.0 * std::f64::consts::PI)).sqrt();
    for m in 0..=lmax {
        if m > 0 {
            pmm *= -s * ((2 * m + 1) as f64 / (2 * m) as f64).sqrt();
        }
        let mut col = vec![pmm];
        if m < lmax {
            col.push(x * ((2 * m + 3) as f64).sqrt() * pmm);
        }
        for l in m + 2..=lmax {
            let a = |l: usize| (((4 * l * l - 1) as f64) / ((l * l - m * m) as f64)).sqrt();
            let next = a(l) * (x * col[l - m - 1] - col[l - m - 2] / a(l - 1));
            col.push(next);
        }
        out.push(col);
    }
    out
}

/// Block-diagonal stacking of per-component bases.
fn block_diag(parts: &[Dense]) -> Dense {
    let rows: usize = parts.iter().map(|p| p.nrows()).sum();
    let cols: usize = parts.iter().map(|p| p.ncols()).sum();
    let mut out = Mat::zeros(rows, cols);
    let (mut r0, mut c0) = (0, 0);
    for p in parts {
        for j in 0..p.ncols() {
            for i in 0..p.nrows() {
                out[(r0 + i, c0 + j)] = p[(i, j)];
            }
        }
        r0 += p.nrows();
        c0 += p.ncols();
    }
    out
}

/// Operators on the union of one or two boundary components, normals pointing out of the region.
#[derive(Clone, Debug)]
pub struct BoundaryOperators {
    pub ops: OperatorSet,
    pub weights: Vec<f64>,
    /// Node count of each component, in block order.
    pub sizes: Vec<usize>,
    /// Ritz subspace, one band-limited grid function per column.
    pub basis: Dense,
}

impl BoundaryOperators {
    pub fn single(grid: &SurfaceGrid, ops: OperatorSet) -> Self {
        Self::single_with_band(grid, ops, DEFAULT_BAND)
    }

    pub fn single_with_band(grid: &SurfaceGrid, ops: OperatorSet, band: f64) -> Self {
        Self { ops, weights: grid.weights().to_vec(), sizes: vec![grid.len()], basis: smooth_basis(grid, band) }
    }

    /// Region between `outer` and the enclosed `inner`; `inner` normals are flipped.
    pub fn shell(outer: &SurfaceGrid, inner: &SurfaceGrid, p: &SingularParams) -> Result<Self> {
        let oo = assemble(outer, p)?;
        let ii = assemble(inner, p)?;
        let oi = cross_blocks_refined(outer, inner, 1.0, -1.0);
        let io = cross_blocks_refined(inner, outer, -1.0, 1.0);
        let (m, n) = (outer.len(), inner.len());
        // flipping the inner normal negates D and S' on the inner diagonal block
        let block = |a: &Dense, b: &Dense, c: &Dense, d: &Dense, flip: f64| {
            Mat::from_fn(m + n, m + n, |i, j| match (i < m, j < m) {
                (true, true) => a[(i, j)],
                (true, false) => b[(i, j - m)],
                (false, true) => c[(i - m, j)],
                (false, false) => flip * d[(i - m, j - m)],
            })
        };
        let ops = OperatorSet {
            s: block(&oo.s, &oi.s, &io.s, &ii.s, 1.0),
            d: block(&oo.d, &oi.d, &io.d, &ii.d, -1.0),
            sp: block(&oo.sp, &oi.sp, &io.sp, &ii.sp, -1.0),
        };
        let mut weights = outer.weights().to_vec();
        weights.extend_from_slice(inner.weights());
        let basis = block_diag(&[smooth_basis(outer, DEFAULT_BAND), smooth_basis(inner, DEFAULT_BAND)]);
        Ok(Self { ops, weights, sizes: vec![m, n], basis })
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Weighted operator norm of `D S - S S'` over all grid functions.
    pub fn calderon_residual(&self) -> f64 {
        let diff = &self.ops.d * &self.ops.s - &self.ops.s * &self.ops.sp;
        let sw: Vec<f64> = self.weights.iter().map(|w| w.sqrt()).collect();
        let isw: Vec<f64> = sw.iter().map(|w| 1.0 / w).collect();
        linalg::spectral_norm(&linalg::scale_rows_cols(&diff, &sw, &isw), 300)
    }

    /// Weighted norm of `D S - S S'` restricted to the Ritz subspace.
    pub fn resolved_calderon_residual(&self) -> f64 {
        let v = &self.basis;
        let diff = &self.ops.d * (&self.ops.s * v) - &self.ops.s * (&self.ops.sp * v);
        let sw: Vec<f64> = self.weights.iter().map(|w| w.sqrt()).collect();
        let ones = vec![1.0; v.ncols()];
        // columns of v have unit weighted norm and are orthogonal up to aliasing
        let gram = v.transpose() * Mat::from_fn(v.nrows(), v.ncols(), |i, j| self.weights[i] * v[(i, j)]);
        let g = linalg::symmetric_eigenvalues(&linalg::symmetrize(&gram)).map(|e| e[0]).unwrap_or(1.0);
        linalg::spectral_norm(&linalg::scale_rows_cols(&diff, &sw, &ones), 300) / g.max(f64::MIN_POSITIVE).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumReport {
    /// Eigenvalues of `S'`, ascending.
    pub eigenvalues: Vec<f64>,
    pub components: usize,
    /// Relative asymmetry of the reduced `W S S'` before symmetrization.
    pub asymmetry: f64,
    /// Calderon residual on the Ritz subspace.
    pub calderon: f64,
    /// Distance from the lowest eigenvalue to the next, and from the highest to the previous.
    pub bottom_gap: f64,
    pub top_gap: f64,
    pub bottom_simple: bool,
    pub top_simple: bool,
    /// Optional nonsymmetric cross-check: largest imaginary part and largest sorted deviation.
    pub cross_check: Option<(f64, f64)>,
}

impl SpectrumReport {
    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// Tolerance for containment statements: discretization level, floored at `1e-9`.
    pub fn tolerance(&self) -> f64 {
        (10.0 * self.calderon).max(1e-9)
    }

    /// Single surface: spectrum in `[-1/2, 1/2)` with `-1/2` simple.
    pub fn single_surface_contained(&self) -> bool {
        let tol = self.tolerance();
        (self.min() + 0.5).abs() <= tol && self.max() < 0.5 - tol && self.bottom_simple
    }

    /// Two components: both `-1/2` and `+1/2` present and simple.
    pub fn shell_contained(&self) -> bool {
        let tol = self.tolerance();
        (self.min() + 0.5).abs() <= tol && (self.max() - 0.5).abs() <= tol && self.bottom_simple && self.top_simple
    }
}

/// Ritz values of `S'` from the symmetrized reduced pencil; `cross_check` adds a plain nonsymmetric eigensolve.
pub fn sprime_spectrum(b: &BoundaryOperators, cross_check: bool) -> Result<SpectrumReport> {
    let n = b.dim();
    let w = &b.weights;
    let v = &b.basis;
    let wv = Mat::from_fn(n, v.ncols(), |i, j| w[i] * v[(i, j)]);
    let sv = &b.ops.s * v;
    let m_red = wv.transpose() * &sv;
    let k_red = wv.transpose() * (&b.ops.s * (&b.ops.sp * v));
    let asymmetry = linalg::asymmetry(&k_red);
    let mut eigenvalues =
        linalg::generalized_symmetric_eigenvalues(&linalg::symmetrize(&k_red), &linalg::symmetrize(&m_red))?;
    eigenvalues.sort_by(f64::total_cmp);
    let calderon = b.resolved_calderon_residual();
    let r = eigenvalues.len();
    let bottom_gap = eigenvalues[1] - eigenvalues[0];
    let top_gap = eigenvalues[r - 1] - eigenvalues[r - 2];
    let simple = |gap: f64| gap > 10.0 * calderon;
    let cross = if cross_check {
        let ev = linalg::general_eigenvalues(&b.ops.sp)?;
        // nearest full eigenvalue to each Ritz value
        let (mut max_im, mut dev) = (0.0f64, 0.0f64);
        for mu in &eigenvalues {
            let best = ev.iter().min_by(|a, b| (a.0 - mu).hypot(a.1).total_cmp(&(b.0 - mu).hypot(b.1))).expect("nonempty");
            max_im = max_im.max(best.1.abs());
            dev = dev.max((best.0 - mu).abs());
        }
        Some((max_im, dev))
    } else {
        None
    };
    Ok(SpectrumReport {
        eigenvalues,
        components: b.sizes.len(),
        asymmetry,
        calderon,
        bottom_gap,
        top_gap,
        bottom_simple: simple(bottom_gap),
        top_simple: simple(top_gap),
        cross_check: cross,
    })
}

/// Ritz values of `S` in the weighted `L2` inner product, ascending.
pub fn s_spectrum(b: &BoundaryOperators) -> Result<Vec<f64>> {
    let n = b.dim();
    let v = &b.basis;
    let wv = Mat::from_fn(n, v.ncols(), |i, j| b.weights[i] * v[(i, j)]);
    let k = wv.transpose() * (&b.ops.s * v);
    let m = wv.transpose() * v;
    let mut ev = linalg::generalized_symmetric_eigenvalues(&linalg::symmetrize(&k), &linalg::symmetrize(&m))?;
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Values `-(mu + 1/2)` of `B` on one surface.
#[derive(Clone, Debug, PartialEq)]
pub struct BSpectrum {
    pub values: Vec<f64>,
    /// `m = max (mu + 1/2)`; the values lie in `[-m, 0]`.
    pub m: f64,
    pub contained: bool,
}

pub fn b_spectrum_from_sprime(report: &SpectrumReport) -> Result<BSpectrum> {
    if report.components != 1 {
        return Err(Error::Containment(format!("{} components; B is defined for one", report.components)));
    }
    let tol = report.tolerance();
    let values: Vec<f64> = report.eigenvalues.iter().map(|mu| -(mu + 0.5)).collect();
    let m = report.eigenvalues.iter().map(|mu| mu + 0.5).fold(f64::NEG_INFINITY, f64::max);
    let contained = values.iter().all(|&b| b > -1.0 && b <= tol) && m < 1.0;
    Ok(BSpectrum { values, m, contained })
}

/// Values `-(1/2 + mu)` of the thin-shell operator.
#[derive(Clone, Debug, PartialEq)]
pub struct ShellSpectrum {
    pub values: Vec<f64>,
    pub contained: bool,
    pub minus_one_simple: bool,
    pub zero_present: bool,
    /// Fraction of values within `0.1` of `-1/2`.
    pub cluster_fraction: f64,
    /// Median over values strictly inside `(-1, 0)`.
    pub interior_median: f64,
}

pub fn thinshell_b_spectrum(report: &SpectrumReport) -> Result<ShellSpectrum> {
    if report.components != 2 {
        return Err(Error::Containment(format!("{} components; the shell operator needs two", report.components)));
    }
    let tol = report.tolerance();
    let mut values: Vec<f64> = report.eigenvalues.iter().map(|mu| -(0.5 + mu)).collect();
    values.sort_by(f64::total_cmp);
    let contained = values.iter().all(|&b| (-1.0 - tol..=tol).contains(&b));
    let minus_one_simple = (values[0] + 1.0).abs() <= tol && report.top_simple;
    let zero_present = values[values.len() - 1].abs() <= tol;
    let cluster = values.iter().filter(|b| (*b + 0.5).abs() < 0.1).count();
    let inner: Vec<f64> = values.iter().copied().filter(|b| *b > -1.0 + tol && *b < -tol).collect();
    let interior_median = if inner.is_empty() { f64::NAN } else { inner[inner.len() / 2] };
    Ok(ShellSpectrum {
        contained,
        minus_one_simple,
        zero_present,
        cluster_fraction: cluster as f64 / values.len() as f64,
        interior_median,
        values,
    })
}

/// Density `g0` spanning the kernel of `1/2 + S'` on one surface, normalized to unit charge.
pub fn equilibrium_density(grid: &SurfaceGrid, ops: &OperatorSet) -> Result<Vec<f64>> {
    let n = grid.len();
    let w = grid.weights();
    let area = grid.area;
    // (1/2 + S') g0 = 0; the rank-one term maps g0 to a constant
    let a = Mat::from_fn(n, n, |i, j| ops.sp[(i, j)] + if i == j { 0.5 } else { 0.0 } + w[j] / area);
    let g = linalg::solve(&a, &vec![1.0; n])?;
    let q: f64 = g.iter().zip(w).map(|(g, w)| g * w).sum();
    Ok(g.iter().map(|v| v / q).collect())
}

/// Refinement used for off-surface probes of `S[g0]`.
const PROBE_REFINEMENT: usize = 4;

/// Relative spread `(max - min) / |mean|` of `S[g0]` over interior probes.
///
/// `g0` is interpolated to a refined grid first, since the plain rule at a probe
/// a distance `d` from the surface only converges like `exp(-2 pi d / h)`.
pub fn g0_constant_check(grid: &SurfaceGrid, g0: &[f64], probes: &[Vec3]) -> Result<f64> {
    let fine = sample_grid_offset(
        &grid.surface,
        grid.nu * PROBE_REFINEMENT,
        grid.nv * PROBE_REFINEMENT,
        grid.u_offset,
        grid.v_offset,
    )?;
    let g = grid.resample(g0, &fine);
    let vals: Vec<f64> = probes.iter().map(|x| eval_s(&fine, &g, x)).collect();
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let (lo, hi) = vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    Ok((hi - lo) / mean.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sample_grid, ParamSurface};
    use crate::vec3::vec3;

    #[test]
    fn sphere_sprime_spectrum_matches_harmonics() {
        let grid = sample_grid(&ParamSurface::Sphere { radius: 1.0 }, 24, 24).unwrap();
        let ops = assemble(&grid, &SingularParams::default()).unwrap();
        let b = BoundaryOperators::single(&grid, ops.clone());
        let rep = sprime_spectrum(&b, true).unwrap();
        let mut k = 0;
        for n in 0..=6usize {
            let expect = -1.0 / (2.0 * (2 * n + 1) as f64);
            for _ in 0..2 * n + 1 {
                assert!((rep.eigenvalues[k] - expect).abs() < 1e-8, "n={n} got {}", rep.eigenvalues[k]);
                k += 1;
            }
        }
        assert!(rep.single_surface_contained());
        let (im, dev) = rep.cross_check.unwrap();
        assert!(im < 1e-8 && dev < 1e-8, "{im} {dev}");
        let bs = b_spectrum_from_sprime(&rep).unwrap();
        assert!(bs.contained && bs.values.iter().any(|v| v.abs() < 1e-9));
        let g0 = equilibrium_density(&grid, &ops).unwrap();
        let probes = [vec3(0.0, 0.0, 0.0), vec3(0.3, -0.2, 0.1), vec3(-0.1, 0.4, -0.3)];
        assert!(g0_constant_check(&grid, &g0, &probes).unwrap() < 1e-8);
        // S has eigenvalue 1/(2n+1); descending order pairs n with the top of the list
        let s = s_spectrum(&b).unwrap();
        let mut k = s.len();
        for n in 0..=6usize {
            for _ in 0..2 * n + 1 {
                k -= 1;
                assert!((s[k] - 1.0 / (2 * n + 1) as f64).abs() < 1e-8, "n={n} got {}", s[k]);
            }
        }
    }

    fn torus(minor: f64) -> SurfaceGrid {
        sample_grid(&ParamSurface::TorusRev { major: 2.0, minor }, 24, 24).unwrap()
    }

    #[test]
    fn torus_and_nested_pair_extremes() {
        let g = torus(1.0);
        let ops = assemble(&g, &SingularParams::default()).unwrap();
        let rep = sprime_spectrum(&BoundaryOperators::single(&g, ops.clone()), false).unwrap();
        assert!(rep.single_surface_contained(), "{} {} {}", rep.min(), rep.max(), rep.calderon);
        let bs = b_spectrum_from_sprime(&rep).unwrap();
        assert!(bs.contained && bs.m < 1.0);
        let g0 = equilibrium_density(&g, &ops).unwrap();
        let probes = [vec3(2.0, 0.0, 0.0), vec3(0.0, -2.5, 0.3), vec3(-1.6, 0.0, -0.5)];
        let spread = g0_constant_check(&g, &g0, &probes).unwrap();
        assert!(spread < 1e-8, "{spread}");

        let pair = BoundaryOperators::shell(&g, &torus(0.5), &SingularParams::default()).unwrap();
        let rep = sprime_spectrum(&pair, false).unwrap();
        assert!(rep.shell_contained(), "{} {} {}", rep.min(), rep.max(), rep.calderon);
        let sh = thinshell_b_spectrum(&rep).unwrap();
        assert!(sh.contained && sh.minus_one_simple && sh.zero_present);
        assert!((sh.interior_median + 0.5).abs() < 0.05);
        assert!(b_spectrum_from_sprime(&rep).is_err());
    }
}
