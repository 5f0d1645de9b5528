//! London sphere of radius `R` in the uniform field `B0 z`.
//!
//! Inside, `B = curl curl (psi x)` with `psi = f(r) cos(theta)` and
//! `(Delta - 1/lambda^2) psi = 0`, so `f` is a multiple of `i1(r / lambda)`.
//! Outside, `B = -grad Phi`, `Phi = -B0 r cos(theta) + D cos(theta) / r^2`.
//! Continuity of `B_r` and `B_theta` at `r = R` fixes `f(R)` and `D`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use super::bessel::sph_i01_scaled;
use crate::boundary_layer::{build_beta, collar_l2_difference};
use crate::error::{Error, Result};
use crate::geometry::{build_collar_for_lambda, sample_grid, ParamSurface, SurfaceGrid};
use crate::harness::{fit_slope, SlopeFit};
use crate::layer_potentials::{assemble, OperatorSet};
use crate::limit_solver::{sheet_current, solve_exterior_limit, FluxSpec, IncomingField, LimitSolution, SolveOptions};
use crate::quadrature::SingularParams;
use crate::vec3::{vec3, Vec3};

/// Below this argument the small-`z` series replace the closed forms.
const SERIES_LIMIT: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LondonSphere {
    pub radius: f64,
    pub lambda: f64,
    pub b0: f64,
    /// `f(R)`: the interior profile is `f(R) i1(r / lambda) / i1(R / lambda)`.
    pub interior_amplitude: f64,
    /// Exterior dipole moment along `z`.
    pub dipole: f64,
}

impl LondonSphere {
    pub fn new(radius: f64, lambda: f64, b0: f64) -> Result<Self> {
        if !(radius > 0.0 && lambda > 0.0 && b0 != 0.0 && b0.is_finite()) || !(radius / lambda).is_finite() {
            return Err(Error::DegenerateParameters(format!("R = {radius}, lambda = {lambda}, B0 = {b0}")));
        }
        let z = radius / lambda;
        let r3 = radius.powi(3);
        // B_r:      2 f(R) / R                         = B0 + 2 D / R^3
        // B_theta:  f(R) / R + f'(R) = f(R)(1/R + L/lambda) = B0 - D / R^3
        let m = Matrix2::new(
            2.0 / radius,
            -2.0 / r3,
            1.0 / radius + log_deriv_i1(z) / lambda,
            1.0 / r3,
        );
        let sol = m
            .lu()
            .solve(&Vector2::new(b0, b0))
            .ok_or_else(|| Error::SolveFailed(format!("matching system singular at lambda = {lambda}")))?;
        Ok(Self { radius, lambda, b0, interior_amplitude: sol[0], dipole: sol[1] })
    }

    pub fn dipole_moment(&self) -> Vec3 {
        vec3(0.0, 0.0, self.dipole)
    }

    /// Radial profile `f(r)` for `r <= R`.
    pub fn profile(&self, r: f64) -> f64 {
        let (z, zeta) = (self.radius / self.lambda, r / self.lambda);
        self.interior_amplitude * i1_ratio(zeta, z)
    }

    /// `(g, h, q)` with interior `B = h z + q x_z x`, `g = f / r`, `q = (2g - h) / r^2`.
    fn interior_coeffs(&self, r: f64) -> (f64, f64, f64) {
        let lam = self.lambda;
        let (z, zeta) = (self.radius / lam, r / lam);
        let (_, sz1) = sph_i01_scaled(z);
        // c i(zeta) = scale * e^{-zeta} i(zeta)
        let scale = self.interior_amplitude / lam * (zeta - z).exp() / sz1;
        let e = (-zeta).exp();
        let (s0, s1) = sph_i01_scaled(zeta);
        let i1z = if zeta < SERIES_LIMIT { e * i1_over_z_series(zeta) } else { s1 / zeta };
        let g = scale * i1z;
        let h = scale * (s0 - i1z);
        let core = if zeta < SERIES_LIMIT {
            e * q_series(zeta)
        } else {
            (3.0 * s1 / zeta - s0) / (zeta * zeta)
        };
        (g, h, scale * core / (lam * lam))
    }

    pub fn is_inside(&self, x: &Vec3) -> bool {
        x.norm() < self.radius
    }

    pub fn field(&self, x: Vec3) -> Vec3 {
        let r = x.norm();
        if r < self.radius {
            let (_, h, q) = self.interior_coeffs(r);
            vec3(0.0, 0.0, h) + x * (q * x.z)
        } else {
            let r3 = r.powi(3);
            vec3(0.0, 0.0, self.b0) + (x * (3.0 * x.z / (r * r)) - vec3(0.0, 0.0, 1.0)) * (self.dipole / r3)
        }
    }

    /// Supercurrent `j = curl B`, zero outside the ball.
    pub fn current(&self, x: Vec3) -> Vec3 {
        if x.norm() >= self.radius {
            return Vec3::zeros();
        }
        let (g, _, _) = self.interior_coeffs(x.norm());
        vec3(x.y, -x.x, 0.0) * (g / (self.lambda * self.lambda))
    }

    /// `B . n` at the surface point in the direction of `x`, from the exterior side.
    pub fn normal_trace(&self, x: Vec3) -> f64 {
        let ct = x.z / x.norm();
        (self.b0 + 2.0 * self.dipole / self.radius.powi(3)) * ct
    }

    /// Tangential part of `B` at the surface point in the direction of `x`.
    pub fn tangential_trace(&self, x: Vec3) -> Vec3 {
        let n = x / x.norm();
        let (_, b) = self.one_sided(x);
        b - n * b.dot(&n)
    }

    /// Interior and exterior values at `r = R -+ 0` along `x`.
    pub fn one_sided(&self, x: Vec3) -> (Vec3, Vec3) {
        let n = x / x.norm();
        let r = self.radius;
        let (_, h, q) = self.interior_coeffs(r);
        let p = n * r;
        let inner = vec3(0.0, 0.0, h) + p * (q * p.z);
        let outer = vec3(0.0, 0.0, self.b0) + (n * (3.0 * n.z) - vec3(0.0, 0.0, 1.0)) * (self.dipole / r.powi(3));
        (inner, outer)
    }
}

/// `i1'(z) / i1(z) = i0 / i1 - 2 / z`.
fn log_deriv_i1(z: f64) -> f64 {
    if z < SERIES_LIMIT {
        // i1 = z S1, i1' = S1 + z S1'; S1 = sum t^k / (k! (2k+3)!!), t = z^2/2
        let s = i1_over_z_series(z);
        let ds = z * d_i1_over_z_series(z);
        return 1.0 / z + ds / s;
    }
    let (s0, s1) = sph_i01_scaled(z);
    s0 / s1 - 2.0 / z
}

/// `i1(zeta) / i1(z)` without overflow.
fn i1_ratio(zeta: f64, z: f64) -> f64 {
    if zeta == 0.0 {
        return 0.0;
    }
    let (_, a) = sph_i01_scaled(zeta);
    let (_, b) = sph_i01_scaled(z);
    a / b * (zeta - z).exp()
}

/// `i1(z) / z = sum_k t^k / (k! (2k+3)!!)`.
fn i1_over_z_series(z: f64) -> f64 {
    let t = 0.5 * z * z;
    let mut term = 1.0 / 3.0;
    let mut sum = term;
    for k in 1..60 {
        term *= t / (k as f64 * (2 * k + 3) as f64);
        sum += term;
        if term <= 1e-17 * sum {
            break;
        }
    }
    sum
}

/// `(1/z) d/dz [i1(z)/z] = sum_{k>=1} t^{k-1} / ((k-1)! (2k+3)!!)`.
fn d_i1_over_z_series(z: f64) -> f64 {
    let t = 0.5 * z * z;
    let mut term = 1.0 / 15.0;
    let mut sum = term;
    for k in 2..60 {
        term *= t / ((k - 1) as f64 * (2 * k + 3) as f64);
        sum += term;
        if term <= 1e-17 * sum {
            break;
        }
    }
    sum
}

/// `(3 i1(z)/z - i0(z)) / z^2 = -sum_{k>=1} t^{k-1} k / (k! (2k+1)!! (2k+3))`.
fn q_series(z: f64) -> f64 {
    let t = 0.5 * z * z;
    // base_k = t^{k-1} / (k! (2k+1)!!)
    let mut base = 1.0 / 3.0;
    let mut sum = -base / 5.0;
    for k in 2..60 {
        base *= t / (k as f64 * (2 * k + 1) as f64);
        let term = base * k as f64 / (2 * k + 3) as f64;
        sum -= term;
        if term <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Chebyshev collocation solution of the radial problem
/// `r^2 f'' + 2 r f' - (2 + r^2/lambda^2) f = 0`, `f(0) = 0`, `2 f(R) + R f'(R) = 3 B0 R / 2`.
#[derive(Clone, Debug)]
pub struct RadialOracle {
    pub radius: f64,
    pub b0: f64,
    nodes: Vec<f64>,
    values: Vec<f64>,
}

impl RadialOracle {
    pub fn solve(radius: f64, lambda: f64, b0: f64, points: usize) -> Result<Self> {
        if points < 8 {
            return Err(Error::InvalidGrid(format!("{points} collocation points")));
        }
        let n = points - 1;
        let x: Vec<f64> = (0..=n).map(|j| (std::f64::consts::PI * j as f64 / n as f64).cos()).collect();
        let d1 = cheb_diff(&x) * (2.0 / radius);
        let d2 = &d1 * &d1;
        // x_0 = 1 maps to r = R, x_n = -1 to r = 0
        let r: Vec<f64> = x.iter().map(|&xi| 0.5 * radius * (xi + 1.0)).collect();
        let mut a = DMatrix::zeros(n + 1, n + 1);
        let mut rhs = DVector::zeros(n + 1);
        for i in 1..n {
            for j in 0..=n {
                a[(i, j)] = r[i] * r[i] * d2[(i, j)] + 2.0 * r[i] * d1[(i, j)];
            }
            a[(i, i)] -= 2.0 + r[i] * r[i] / (lambda * lambda);
        }
        for j in 0..=n {
            a[(0, j)] = radius * d1[(0, j)];
        }
        a[(0, 0)] += 2.0;
        rhs[0] = 1.5 * b0 * radius;
        a[(n, n)] = 1.0;
        let f = a
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::SolveFailed("radial collocation matrix singular".into()))?;
        Ok(Self { radius, b0, nodes: r, values: f.iter().copied().collect() })
    }

    /// Barycentric interpolation on the Chebyshev–Lobatto nodes.
    pub fn profile(&self, r: f64) -> f64 {
        let n = self.nodes.len() - 1;
        let (mut num, mut den) = (0.0, 0.0);
        for (j, (&rj, &fj)) in self.nodes.iter().zip(&self.values).enumerate() {
            let d = r - rj;
            if d == 0.0 {
                return fj;
            }
            let w = if j == 0 || j == n { 0.5 } else { 1.0 } * if j % 2 == 0 { 1.0 } else { -1.0 };
            num += w / d * fj;
            den += w / d;
        }
        num / den
    }

    /// `D = R^3 (f(R) / R - B0 / 2)` from the normal-component condition.
    pub fn dipole(&self) -> f64 {
        self.radius.powi(3) * (self.values[0] / self.radius - 0.5 * self.b0)
    }
}

/// First-derivative matrix on Chebyshev–Lobatto nodes `x_j = cos(pi j / n)`.
fn cheb_diff(x: &[f64]) -> DMatrix<f64> {
    let n = x.len() - 1;
    let c = |j: usize| if j == 0 || j == n { 2.0 } else { 1.0 } * if j % 2 == 0 { 1.0 } else { -1.0 };
    let mut d = DMatrix::zeros(n + 1, n + 1);
    for i in 0..=n {
        for j in 0..=n {
            if i != j {
                d[(i, j)] = c(i) / c(j) / (x[i] - x[j]);
            }
        }
    }
    // negative-sum trick keeps rows summing to zero
    for i in 0..=n {
        let s: f64 = (0..=n).filter(|&j| j != i).map(|j| d[(i, j)]).sum();
        d[(i, i)] = -s;
    }
    d
}

/// Polynomial (Neville) extrapolation of `(lambda, value)` samples to `lambda = 0`.
pub fn richardson_to_zero(samples: &[(f64, f64)]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::SlopeData(format!("{} samples for extrapolation", samples.len())));
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let mut p: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let n = p.len();
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (xs[i + m] * p[i] - xs[i] * p[i + 1]) / (xs[i + m] - xs[i]);
        }
    }
    Ok(p[0])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereRow {
    pub lambda: f64,
    /// `||B_lambda . n||` on the sphere.
    pub normal_l2: f64,
    /// `||B_lambda,tan - B_0,tan||` on the sphere.
    pub tangential_l2: f64,
    /// `||B_lambda - beta_lambda||` over the collar.
    pub collar_l2: f64,
    pub dipole: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SphereStudy {
    pub radius: f64,
    pub b0: f64,
    pub rows: Vec<SphereRow>,
    pub normal_fit: Option<SlopeFit>,
    pub tangential_fit: Option<SlopeFit>,
    pub collar_fit: Option<SlopeFit>,
    /// Dipole of the limiting exterior solve.
    pub limit_dipole: f64,
    /// Exact dipoles extrapolated to `lambda = 0` from the smallest four `lambda`.
    pub extrapolated_dipole: f64,
}

/// Limiting exterior solve for the sphere in `B0 z`.
pub fn sphere_limit(grid: Arc<SurfaceGrid>, b0: f64) -> Result<(OperatorSet, LimitSolution)> {
    let ops = assemble(&grid, &SingularParams::default())?;
    let inc = IncomingField::uniform(vec3(0.0, 0.0, b0));
    let sol = solve_exterior_limit(grid, &ops, &inc, &FluxSpec::none(), &SolveOptions::default())?;
    Ok((ops, sol))
}

/// Compares the exact London sphere with the limiting fields for each `lambda`.
///
/// The collar has half-width `r0 = R / 4` and `beta_lambda` is built from the
/// limiting sheet current.
pub fn sphere_convergence_study(radius: f64, b0: f64, lambdas: &[f64], resolution: usize) -> Result<SphereStudy> {
    let grid = Arc::new(sample_grid(&ParamSurface::Sphere { radius }, resolution, resolution)?);
    let (_, sol) = sphere_limit(grid.clone(), b0)?;
    let limit_trace = sol.total_trace()?;
    let gamma0 = sheet_current(&sol)?;
    let w = grid.weights();
    let mut rows = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let exact = LondonSphere::new(radius, lambda, b0)?;
        let (mut nn, mut tt) = (0.0, 0.0);
        for (k, nd) in grid.nodes.iter().enumerate() {
            let x = nd.chart.x;
            nn += w[k] * exact.normal_trace(x).powi(2);
            let lim = limit_trace[k] - nd.n * limit_trace[k].dot(&nd.n);
            tt += w[k] * (exact.tangential_trace(x) - lim).norm_squared();
        }
        let collar = build_collar_for_lambda(grid.clone(), 0.25 * radius, lambda, radius)?;
        let beta = build_beta(collar, &gamma0, lambda)?;
        let collar_l2 = collar_l2_difference(&beta, |x| exact.field(x));
        rows.push(SphereRow {
            lambda,
            normal_l2: nn.sqrt(),
            tangential_l2: tt.sqrt(),
            collar_l2,
            dipole: exact.dipole,
        });
    }
    let fit = |f: fn(&SphereRow) -> f64| fit_slope(&rows.iter().map(|r| (r.lambda, f(r))).collect::<Vec<_>>()).ok();
    let mut by_lambda: Vec<(f64, f64)> = rows.iter().map(|r| (r.lambda, r.dipole)).collect();
    by_lambda.sort_by(|a, b| a.0.total_cmp(&b.0));
    by_lambda.truncate(4);
    Ok(SphereStudy {
        radius,
        b0,
        normal_fit: fit(|r| r.normal_l2),
        tangential_fit: fit(|r| r.tangential_l2),
        collar_fit: fit(|r| r.collar_l2),
        limit_dipole: sol.dipole_moment().z,
        extrapolated_dipole: richardson_to_zero(&by_lambda)?,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn closed_form_matches_radial_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (radius, b0) = (1.3, 0.8);
        for _ in 0..10 {
            let lambda = radius * 10f64.powf(rng.random_range(-1.3..0.7));
            let r = radius * rng.random_range(0.0..1.0);
            let s = LondonSphere::new(radius, lambda, b0).unwrap();
            let o = RadialOracle::solve(radius, lambda, b0, 96).unwrap();
            let scale = b0 * radius;
            assert!((s.profile(r) - o.profile(r)).abs() < 1e-8 * scale, "lambda {lambda} r {r}");
            assert!((s.dipole - o.dipole()).abs() < 1e-8 * scale * radius * radius);
        }
    }

    #[test]
    fn continuity_across_the_surface() {
        for &lambda in &[3.0, 0.5, 0.05, 1e-3] {
            let s = LondonSphere::new(1.0, lambda, 2.0).unwrap();
            for &x in &[vec3(0.3, 0.4, 0.5), vec3(0.0, 1.0, -0.2), vec3(0.0, 0.0, 1.0)] {
                let (a, b) = s.one_sided(x);
                assert!((a - b).norm() < 1e-10 * 2.0, "lambda {lambda}: {a:?} {b:?}");
                let n = x.normalize();
                assert!((s.normal_trace(x) - b.dot(&n)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn limits_in_lambda() {
        let (r, b0) = (1.5f64, 2.0);
        let d0 = -0.5 * b0 * r.powi(3);
        let small = LondonSphere::new(r, 1e-6 * r, b0).unwrap();
        assert!((small.dipole - d0).abs() < 1e-5 * d0.abs());
        let big = LondonSphere::new(r, 1e4 * r, b0).unwrap();
        assert!(big.dipole.abs() < 1e-8 * d0.abs());
        for &x in &[vec3(0.1, 0.2, 0.3), vec3(-1.0, 0.5, 0.2), Vec3::zeros()] {
            assert!((big.field(x) - vec3(0.0, 0.0, b0)).norm() < 1e-8);
        }
        // dipole = D0 (1 - 3 lambda/R + 3 lambda^2/R^2) up to exponentially small terms
        let lam = r / 40.0;
        let mid = LondonSphere::new(r, lam, b0).unwrap();
        let t = lam / r;
        assert!((mid.dipole - d0 * (1.0 - 3.0 * t + 3.0 * t * t)).abs() < 1e-12);
    }

    #[test]
    fn london_relations_by_finite_differences() {
        let s = LondonSphere::new(1.0, 0.3, 1.0).unwrap();
        let h = 1e-4;
        let e = [vec3(h, 0.0, 0.0), vec3(0.0, h, 0.0), vec3(0.0, 0.0, h)];
        let curl = |f: &dyn Fn(Vec3) -> Vec3, x: Vec3| {
            let d = |i: usize| (f(x + e[i]) - f(x - e[i])) / (2.0 * h);
            let (dx, dy, dz) = (d(0), d(1), d(2));
            vec3(dy.z - dz.y, dz.x - dx.z, dx.y - dy.x)
        };
        for &x in &[vec3(0.2, -0.1, 0.3), vec3(0.5, 0.4, -0.2), vec3(0.01, 0.02, 0.9), vec3(0.6, 0.0, 0.1)] {
            let b = s.field(x);
            let j = s.current(x);
            let cb = curl(&|y| s.field(y), x);
            let cj = curl(&|y| s.current(y), x);
            assert!((cb - j).norm() < 1e-6 * j.norm().max(b.norm()), "{cb:?} {j:?}");
            let target = -b / (s.lambda * s.lambda);
            assert!((cj - target).norm() < 1e-6 * target.norm(), "{cj:?} {target:?}");
        }
    }

    #[test]
    fn series_agree_with_closed_forms_at_the_switch() {
        let z = SERIES_LIMIT;
        let (s0, s1) = sph_i01_scaled(z * (1.0 + 1e-12));
        let e = (-z).exp();
        assert!((e * i1_over_z_series(z) - s1 / z).abs() < 1e-13);
        assert!((e * q_series(z) - (3.0 * s1 / z - s0) / (z * z)).abs() < 1e-12);
        assert!((log_deriv_i1(z * (1.0 - 1e-14)) - log_deriv_i1(z)).abs() < 1e-12);
    }

    #[test]
    fn richardson_recovers_polynomial_limit() {
        let f = |l: f64| -1.0 + 3.0 * l - 2.0 * l * l + 0.5 * l * l * l;
        let pts: Vec<(f64, f64)> = [0.1, 0.05, 0.025, 0.0125].iter().map(|&l| (l, f(l))).collect();
        assert!((richardson_to_zero(&pts).unwrap() + 1.0).abs() < 1e-13);
    }
}
