//! One-dimensional rules, periodic interpolation and the surface quadratures.

pub mod singular;

use std::f64::consts::PI;

use crate::geometry::SurfaceGrid;

pub use singular::{singular_apply, KernelKind, SingularParams, SingularRule};

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        dp = if d != 0.0 { d } else { dp };
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// A 1D rule as parallel node and weight vectors.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Rule1D {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule1D {
    pub fn gauss(n: usize, a: f64, b: f64) -> Self {
        let (x, w) = gauss_legendre(n);
        let h = 0.5 * (b - a);
        let c = 0.5 * (a + b);
        Self {
            nodes: x.iter().map(|t| c + h * t).collect(),
            weights: w.iter().map(|v| v * h).collect(),
        }
    }

    /// Composite Gauss rule over consecutive panel edges.
    pub fn composite(edges: &[f64], per_panel: usize) -> Self {
        let mut r = Self::default();
        for e in edges.windows(2) {
            let p = Self::gauss(per_panel, e[0], e[1]);
            r.nodes.extend(p.nodes);
            r.weights.extend(p.weights);
        }
        r
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(*x)).sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Uniform periodic nodes `offset + 2 pi j / n`.
pub fn periodic_nodes(n: usize, offset: f64) -> Vec<f64> {
    (0..n).map(|j| offset + 2.0 * PI * j as f64 / n as f64).collect()
}

/// Trigonometric interpolation weights at `x` for the uniform grid `x0 + 2 pi j / n`.
pub fn trig_weights(n: usize, x0: f64, x: f64, out: &mut [f64]) {
    let h = 2.0 * PI / n as f64;
    let t = (x - x0) / h;
    let m = t.round();
    // every factor uses the offset from the nearest node so they stay consistent
    let delta = (x - x0) - m * h;
    let mi = (m as i64).rem_euclid(n as i64) as usize;
    if delta.abs() < 1e-15 * (1.0 + x.abs()) {
        out.iter_mut().for_each(|w| *w = 0.0);
        out[mi] = 1.0;
        return;
    }
    let nf = n as f64;
    let s0 = (0.5 * nf * delta).sin();
    let even = n % 2 == 0;
    // half-angles (delta + k h) / 2 by rotation from k = 0 in both directions
    let (sh, ch) = (0.5 * h).sin_cos();
    let (sd, cd) = (0.5 * delta).sin_cos();
    let ni = n as i64;
    let (kmin, kmax) = if even { (-(ni / 2) + 1, ni / 2) } else { (-(ni - 1) / 2, (ni - 1) / 2) };
    let mut put = |k: i64, sk: f64, ck: f64| {
        let j = (mi as i64 - k).rem_euclid(ni) as usize;
        let sn = if k.rem_euclid(2) == 0 { s0 } else { -s0 };
        out[j] = if even { sn * ck / (nf * sk) } else { sn / (nf * sk) };
    };
    put(0, sd, cd);
    let (mut s, mut c) = (sd, cd);
    for k in 1..=kmax {
        (s, c) = (s * ch + c * sh, c * ch - s * sh);
        put(k, s, c);
    }
    let (mut s, mut c) = (sd, cd);
    for k in (kmin..0).rev() {
        (s, c) = (s * ch - c * sh, c * ch + s * sh);
        put(k, s, c);
    }
}

/// Spectral differentiation matrix (row-major) for `n` uniform periodic nodes.
pub fn periodic_diff_matrix(n: usize) -> Vec<f64> {
    let h = 2.0 * PI / n as f64;
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let k = i as i64 - j as i64;
            let sgn = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let a = 0.5 * k as f64 * h;
            d[i * n + j] = if n % 2 == 0 {
                0.5 * sgn / a.tan()
            } else {
                0.5 * sgn / a.sin()
            };
        }
    }
    d
}

/// Lagrange basis values and first derivatives at `x` for nodes `xs`.
pub fn lagrange_weights(xs: &[f64], x: f64, val: &mut [f64], der: &mut [f64]) {
    let p = xs.len();
    for l in 0..p {
        let mut num = 1.0;
        let mut den = 1.0;
        let mut dsum = 0.0;
        let mut exact = false;
        for k in 0..p {
            if k == l {
                continue;
            }
            den *= xs[l] - xs[k];
            let dx = x - xs[k];
            if dx == 0.0 {
                exact = true;
            }
            num *= dx;
        }
        if !exact {
            for k in 0..p {
                if k != l {
                    dsum += 1.0 / (x - xs[k]);
                }
            }
            val[l] = num / den;
            der[l] = val[l] * dsum;
        } else {
            val[l] = num / den;
            // derivative of the product with one vanishing factor
            let mut d = 0.0;
            for m in 0..p {
                if m == l {
                    continue;
                }
                let mut prod = 1.0;
                for k in 0..p {
                    if k != l && k != m {
                        prod *= x - xs[k];
                    }
                }
                d += prod;
            }
            der[l] = d / den;
        }
    }
}

/// Plain smooth-rule integral `sum_k w_k f(x_k)`.
pub fn smooth_surface_integral(grid: &SurfaceGrid, f: impl Fn(usize) -> f64) -> f64 {
    grid.weights().iter().enumerate().map(|(k, w)| w * f(k)).sum()
}

/// Adaptive Gauss–Legendre integration of a smooth function on `[a, b]`.
pub fn adaptive_gauss(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let l = Rule1D::gauss(20, a, m).integrate(f);
        let r = Rule1D::gauss(20, m, b).integrate(f);
        if depth > 40 || (l + r - whole).abs() <= tol.max(1e-15 * (l + r).abs()) {
            l + r
        } else {
            rec(f, a, m, l, 0.5 * tol, depth + 1) + rec(f, m, b, r, 0.5 * tol, depth + 1)
        }
    }
    if a == b {
        return 0.0;
    }
    let whole = Rule1D::gauss(20, a, b).integrate(f);
    rec(f, a, b, whole, tol, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        for n in [1usize, 2, 5, 16, 64] {
            let (x, w) = gauss_legendre(n);
            let total: f64 = w.iter().sum();
            assert!((total - 2.0).abs() < 1e-13);
            let deg = 2 * n - 1;
            let m: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32 - 1)).sum();
            // degree deg-1 is even when deg is odd
            let exact = 2.0 / deg as f64;
            assert!((m - exact).abs() < 1e-12, "n={n} got {m} want {exact}");
        }
    }

    #[test]
    fn trig_interpolation_reproduces_band_limited() {
        let n = 16;
        let x0 = 0.3;
        let xs = periodic_nodes(n, x0);
        let f = |t: f64| 1.0 + (3.0 * t).sin() - 0.5 * (7.0 * t).cos();
        let vals: Vec<f64> = xs.iter().map(|&t| f(t)).collect();
        let mut w = vec![0.0; n];
        for &x in &[0.0, 1.234, 5.9, xs[3]] {
            trig_weights(n, x0, x, &mut w);
            let v: f64 = w.iter().zip(&vals).map(|(a, b)| a * b).sum();
            assert!((v - f(x)).abs() < 1e-13, "x={x}");
        }
    }

    #[test]
    fn periodic_derivative_is_spectral() {
        let n = 32;
        let xs = periodic_nodes(n, 0.0);
        let d = periodic_diff_matrix(n);
        for i in 0..n {
            let s: f64 = (0..n).map(|j| d[i * n + j] * (xs[j]).sin().exp()).sum();
            let e = xs[i].cos() * xs[i].sin().exp();
            assert!((s - e).abs() < 1e-11);
        }
    }

    #[test]
    fn lagrange_weights_differentiate_cubic() {
        let xs = [0.0, 0.4, 1.1, 2.0];
        let mut v = [0.0; 4];
        let mut d = [0.0; 4];
        for &x in &[0.7, 0.4] {
            lagrange_weights(&xs, x, &mut v, &mut d);
            let f = |t: f64| t * t * t - 2.0 * t;
            let val: f64 = xs.iter().zip(&v).map(|(t, w)| w * f(*t)).sum();
            let der: f64 = xs.iter().zip(&d).map(|(t, w)| w * f(*t)).sum();
            assert!((val - f(x)).abs() < 1e-13);
            assert!((der - (3.0 * x * x - 2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn adaptive_gauss_on_exponential() {
        let v = adaptive_gauss(&|s: f64| (s / 0.01).exp(), -1.0, 0.0, 1e-14);
        assert!((v - 0.01 * (1.0 - (-100.0f64).exp())).abs() < 1e-14);
    }
}
