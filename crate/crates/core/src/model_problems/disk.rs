//! Dirichlet eigen-expansion on the unit disk and the distance `D_lambda`.
//!
//! Eigenfunctions `phi_{j,m} = n_{j,m} e^{i m theta} J_|m|(k_{j,m} r)` with
//! `n_{j,m} = sqrt(2) / |J_{|m|+1}(k_{j,m})|`, normalized radially.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::bessel::{bessel_j, bessel_j_pair, bessel_zeros, mcmahon_zero};
use crate::error::{Error, Result};
use crate::quadrature::Rule1D;

const GAUSS_PER_PANEL: usize = 64;
const MAX_PANELS: usize = 512;
/// Tail terms summed explicitly with asymptotic zeros before the integral estimate takes over.
const EXPLICIT_TAIL: usize = 4096;
/// Accepted ratio of tail uncertainty to `D^2`.
pub const TAIL_TOLERANCE: f64 = 1e-8;

/// Expansion coefficients of one test function.
#[derive(Clone, Debug, PartialEq)]
pub struct DiskSpectrum {
    pub max_order: usize,
    pub zeros_per_order: usize,
    /// `k_{j,m}` for `m = 0..=max_order`.
    pub zeros: Vec<Vec<f64>>,
    pub normalizers: Vec<Vec<f64>>,
    /// `|a_{j,m}|^2 + |a_{j,-m}|^2` (just `|a_{j,0}|^2` for `m = 0`).
    pub coeff_sq: Vec<Vec<f64>>,
    /// `c_m = max_j k_{j,m} |a_{j,+-m}|`.
    pub envelope: Vec<f64>,
    /// Tail model `k^2 |a|^2 = c0 + c1 / k^2 + c2 / k^4` for `j > J`, fitted on the last quarter of zeros.
    pub tail_law: Vec<[f64; 3]>,
    /// Largest fit residual on the last quarter, relative to `|c0|`.
    pub tail_drift: Vec<f64>,
}

/// Angular Fourier modes `u_m(r)` for `m in -M..=M` at the given radii.
fn angular_modes(u: &(dyn Fn(f64, f64) -> f64 + Sync), max_order: usize, radii: &[f64]) -> Vec<Vec<(f64, f64)>> {
    let nt = (4 * max_order + 4).max(128);
    radii
        .par_iter()
        .map(|&r| {
            let vals: Vec<f64> = (0..nt)
                .map(|l| {
                    let t = 2.0 * PI * l as f64 / nt as f64;
                    u(r * t.cos(), r * t.sin())
                })
                .collect();
            (-(max_order as i64)..=max_order as i64)
                .map(|m| {
                    let (mut re, mut im) = (0.0, 0.0);
                    for (l, v) in vals.iter().enumerate() {
                        let t = 2.0 * PI * (m * l as i64) as f64 / nt as f64;
                        re += v * t.cos();
                        im -= v * t.sin();
                    }
                    (re / nt as f64, im / nt as f64)
                })
                .collect()
        })
        .collect()
}

/// Least squares of `k^2 |a|^2` against `1, k^-2, k^-4`.
///
/// Repeated integration by parts gives `a_{j,m}` as `J_{m+1}(k) / k` times an even
/// series in `1 / k` whose terms are boundary values of `Delta^p u_m`.
fn fit_tail(k: &[f64], sq: &[f64]) -> ([f64; 3], f64) {
    let y: Vec<f64> = k.iter().zip(sq).map(|(k, s)| k * k * s).collect();
    let scale = y.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    if scale == 0.0 {
        return ([0.0; 3], 0.0);
    }
    let mut ata = nalgebra::Matrix3::<f64>::zeros();
    let mut aty = nalgebra::Vector3::<f64>::zeros();
    for (k, y) in k.iter().zip(&y) {
        let x = 1.0 / (k * k);
        let row = nalgebra::Vector3::new(1.0, x, x * x);
        ata += row * row.transpose();
        aty += row * *y;
    }
    let c = ata.lu().solve(&aty).unwrap_or_else(|| nalgebra::Vector3::new(y[y.len() - 1], 0.0, 0.0));
    let resid = k
        .iter()
        .zip(&y)
        .map(|(k, y)| {
            let x = 1.0 / (k * k);
            (c[0] + c[1] * x + c[2] * x * x - y).abs()
        })
        .fold(0.0, f64::max);
    ([c[0], c[1], c[2]], resid / c[0].abs().max(f64::MIN_POSITIVE))
}

/// Radial rule with cached angular modes.
struct Level {
    rule: Rule1D,
    modes: Vec<Vec<(f64, f64)>>,
    /// Largest `|u_m(r)|`, the floor for modes that vanish to roundoff.
    scale: f64,
}

impl Level {
    fn new(u: &(dyn Fn(f64, f64) -> f64 + Sync), max_order: usize, panels: usize) -> Self {
        let edges: Vec<f64> = (0..=panels).map(|p| p as f64 / panels as f64).collect();
        let rule = Rule1D::composite(&edges, GAUSS_PER_PANEL);
        let modes = angular_modes(u, max_order, &rule.nodes);
        let scale = modes.iter().flatten().map(|z| z.0.hypot(z.1)).fold(0.0, f64::max);
        Self { rule, modes, scale }
    }

    /// `int_0^1 u_m(r) J_|m|(k r) r dr` for `m` and `-m`, plus `int |integrand|`.
    fn integrate(&self, m: usize, max_order: usize, k: f64) -> ((f64, f64), (f64, f64), f64) {
        let (ip, im) = (max_order + m, max_order - m);
        let (mut p, mut q, mut abs) = ((0.0, 0.0), (0.0, 0.0), 0.0);
        for (i, (&r, &w)) in self.rule.nodes.iter().zip(&self.rule.weights).enumerate() {
            let jr = w * r * bessel_j(m, k * r);
            let (a, b) = (self.modes[i][ip], self.modes[i][im]);
            p.0 += jr * a.0;
            p.1 += jr * a.1;
            q.0 += jr * b.0;
            q.1 += jr * b.1;
            abs += jr.abs() * (a.0.hypot(a.1) + b.0.hypot(b.1));
        }
        (p, q, abs)
    }
}

impl DiskSpectrum {
    /// Coefficients of `u` against `phi_{j,m}` for `|m| <= max_order`, `j <= zeros_per_order`.
    pub fn build(u: &(dyn Fn(f64, f64) -> f64 + Sync), max_order: usize, zeros_per_order: usize) -> Result<Self> {
        if zeros_per_order < 4 {
            return Err(Error::Config("at least 4 zeros per order".into()));
        }
        let zeros: Vec<Vec<f64>> =
            (0..=max_order).into_par_iter().map(|m| bessel_zeros(m, zeros_per_order)).collect::<Result<_>>()?;
        let kmax = zeros.iter().flat_map(|z| z.last()).fold(0.0f64, |a, &b| a.max(b));
        // panel counts double until consecutive results agree
        let mut levels: Vec<(usize, Level)> = Vec::new();
        let mut panels = 2usize;
        while panels <= MAX_PANELS {
            levels.push((panels, Level::new(u, max_order, panels)));
            if (panels as f64) > kmax / 8.0 + 2.0 {
                break;
            }
            panels *= 2;
        }
        let per_order: Vec<(Vec<f64>, Vec<f64>)> = (0..=max_order)
            .into_par_iter()
            .map(|m| {
                let mut norms = Vec::with_capacity(zeros_per_order);
                let mut sq = Vec::with_capacity(zeros_per_order);
                for &k in &zeros[m] {
                    let n = 2f64.sqrt() / bessel_j_pair(m, k).1.abs();
                    let start = levels.iter().position(|(p, _)| *p as f64 >= k / 16.0 + 1.0).unwrap_or(levels.len() - 1);
                    let mut prev = levels[start].1.integrate(m, max_order, k);
                    let mut done = false;
                    for (_, lvl) in &levels[start + 1..] {
                        let cur = lvl.integrate(m, max_order, k);
                        let delta = (cur.0 .0 - prev.0 .0).hypot(cur.0 .1 - prev.0 .1)
                            + (cur.1 .0 - prev.1 .0).hypot(cur.1 .1 - prev.1 .1);
                        prev = cur;
                        if delta <= 1e-13 * cur.2 + 1e-16 * lvl.scale {
                            done = true;
                            break;
                        }
                    }
                    if !done {
                        return Err(Error::UnconvergedTail(format!("radial integral m={m} k={k}")));
                    }
                    let (p, q, _) = prev;
                    let mut s = n * n * (p.0 * p.0 + p.1 * p.1);
                    if m > 0 {
                        s += n * n * (q.0 * q.0 + q.1 * q.1);
                    }
                    norms.push(n);
                    sq.push(s);
                }
                Ok((norms, sq))
            })
            .collect::<Result<_>>()?;
        let (normalizers, coeff_sq): (Vec<_>, Vec<_>) = per_order.into_iter().unzip();
        let envelope: Vec<f64> = zeros
            .iter()
            .zip(&coeff_sq)
            .map(|(z, s)| z.iter().zip(s).map(|(k, s)| k * s.sqrt()).fold(0.0, f64::max))
            .collect();
        let (tail_law, tail_drift): (Vec<[f64; 3]>, Vec<f64>) =
            zeros.iter().zip(&coeff_sq).map(|(z, s)| fit_tail(&z[3 * z.len() / 4..], &s[3 * s.len() / 4..])).unzip();
        // the envelope must also dominate the tail, whose k |a| tends to sqrt(c0)
        let envelope = envelope.iter().zip(&tail_law).map(|(e, c): (&f64, _)| e.max(c[0].max(0.0).sqrt())).collect();
        Ok(Self { max_order, zeros_per_order, zeros, normalizers, coeff_sq, envelope, tail_law, tail_drift })
    }

    /// Default test function `u = e^x`.
    pub fn exp_x(max_order: usize, zeros_per_order: usize) -> Result<Self> {
        Self::build(&|x: f64, _y: f64| x.exp(), max_order, zeros_per_order)
    }

    /// Partial sums over `j` of `sum_m k^{4 alpha} |a_{j,m}|^2`.
    pub fn weighted_partial_sums(&self, alpha: f64) -> Vec<f64> {
        let mut acc = 0.0;
        (0..self.zeros_per_order)
            .map(|j| {
                for m in 0..=self.max_order {
                    acc += self.zeros[m][j].powf(4.0 * alpha) * self.coeff_sq[m][j];
                }
                acc
            })
            .collect()
    }
}

/// `D_lambda` with its parts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DLambda {
    pub lambda: f64,
    pub d: f64,
    /// Sum over the computed coefficients.
    pub explicit: f64,
    /// Asymptotic tail beyond the computed zeros.
    pub tail: f64,
    pub tail_uncertainty: f64,
    /// `sum lambda^4 c_m^2 k^2 / (1 + lambda^2 k^2)^2` including its tail.
    pub envelope_bound: f64,
}

fn weight(lambda: f64, k: f64) -> f64 {
    let s = lambda * k;
    lambda * lambda * s * s / ((1.0 + s * s) * (1.0 + s * s))
}

/// `sum_{j > J} lambda^4 k_j^2 / (1 + lambda^2 k_j^2)^2 k_j^{-2p}` for `p = 0, 1, 2`, McMahon zeros of order `m`.
///
/// The last entry is the first start wavenumber `k0` of the integral remainder.
fn tail_sums(m: usize, first: usize, lambda: f64) -> ([f64; 3], f64, f64) {
    let last = first + EXPLICIT_TAIL;
    let mut acc = [0.0; 3];
    for j in first..last {
        let k = mcmahon_zero(m, j);
        let w = weight(lambda, k);
        let x = 1.0 / (k * k);
        acc[0] += w;
        acc[1] += w * x;
        acc[2] += w * x * x;
    }
    // integral of lambda^2 s^2 / (1 + s^2)^2 dj with dk = pi dj, s = lambda k
    let k0 = (last as f64 - 0.5 + 0.5 * m as f64 - 0.25) * PI;
    let s0 = lambda * k0;
    let rest = lambda / PI * 0.5 * (0.5 * PI - s0.atan() + s0 / (1.0 + s0 * s0));
    acc[0] += rest;
    (acc, rest, k0)
}

/// Exact sum `D^2 = sum lambda^4 k^4 |a|^2 / (1 + lambda^2 k^2)^2`.
pub fn disk_dlambda(spec: &DiskSpectrum, lambda: f64) -> Result<DLambda> {
    if !(lambda > 0.0) {
        return Err(Error::Config(format!("lambda = {lambda}")));
    }
    let (mut explicit, mut tail, mut unc, mut env) = (0.0, 0.0, 0.0, 0.0);
    for m in 0..=spec.max_order {
        let z = &spec.zeros[m];
        for (k, s) in z.iter().zip(&spec.coeff_sq[m]) {
            explicit += weight(lambda, *k) * k * k * s;
            env += weight(lambda, *k) * spec.envelope[m].powi(2);
        }
        let (ts, rest, k0) = tail_sums(m, spec.zeros_per_order + 1, lambda);
        let c = spec.tail_law[m];
        tail += c[0] * ts[0] + c[1] * ts[1] + c[2] * ts[2];
        // the integral remainder carries only c0; the dropped terms are bounded by their value at k0
        let dropped = rest * (c[1].abs() / (k0 * k0) + c[2].abs() / k0.powi(4));
        unc += c[0].abs() * spec.tail_drift[m] * ts[0] + dropped;
        env += spec.envelope[m].powi(2) * ts[0];
    }
    let d2 = explicit + tail;
    if unc > TAIL_TOLERANCE * d2 {
        return Err(Error::UnconvergedTail(format!("tail uncertainty {unc:e} against D^2 = {d2:e} at lambda {lambda}")));
    }
    Ok(DLambda { lambda, d: d2.sqrt(), explicit, tail, tail_uncertainty: unc, envelope_bound: env.sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model_problems::bessel::bessel_i;

    #[test]
    fn exp_coefficients_match_green_identity() {
        // Delta e^x = e^x and u_m = I_m, so Green's identity gives
        // int u_m J_m(k r) r dr = I_m(1) k J_{m+1}(k) / (1 + k^2) exactly
        let spec = DiskSpectrum::exp_x(8, 24).unwrap();
        for m in 0..=8 {
            let c2 = if m == 0 { 2.0 } else { 4.0 } * bessel_i(m, 1.0).powi(2);
            for (k, s) in spec.zeros[m].iter().zip(&spec.coeff_sq[m]) {
                let exact = c2 * k * k / ((1.0 + k * k) * (1.0 + k * k));
                // angular modes carry absolute roundoff of order 1e-16 I_0(1)
                let tol = 1e-10 + 1e-13 * bessel_i(0, 1.0) / bessel_i(m, 1.0);
                assert!((s / exact - 1.0).abs() < tol, "m={m} k={k} {}", s / exact - 1.0);
            }
            // the fitted law reproduces c0 = c2 up to the neglected k^-6 term
            assert!((spec.tail_law[m][0] / c2 - 1.0).abs() < 1e-6, "{:?}", spec.tail_law[m]);
        }
    }

    #[test]
    fn eigenfunction_has_single_term() {
        let k = bessel_zeros(0, 1).unwrap()[0];
        let n = 2f64.sqrt() / bessel_j_pair(0, k).1.abs();
        let spec = DiskSpectrum::build(&|x: f64, y: f64| n * bessel_j(0, k * x.hypot(y)), 2, 8).unwrap();
        for lam in [1e-3, 1e-2, 0.3] {
            let d = disk_dlambda(&spec, lam).unwrap();
            let s = lam * k;
            let exact = s.powi(4) / ((1.0 + s * s) * (1.0 + s * s));
            assert!((d.d * d.d - exact).abs() < 1e-12 * exact.max(1e-30) + 1e-24, "{d:?}");
        }
    }

    #[test]
    fn dlambda_is_monotone_and_below_envelope() {
        let spec = DiskSpectrum::exp_x(10, 16).unwrap();
        let mut prev = 0.0;
        for l in [1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.3, 1.0] {
            let d = disk_dlambda(&spec, l).unwrap();
            assert!(d.d > prev && d.d <= d.envelope_bound * (1.0 + 1e-12));
            prev = d.d;
        }
    }
}
