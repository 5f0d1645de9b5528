//! Bessel functions needed by the model problems.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Power series is used below this argument; cancellation costs about `z / ln 10` digits.
const SERIES_LIMIT: f64 = 2.0;

/// `J_m(z)` for `m >= 0`, `z >= 0`.
pub fn bessel_j(m: usize, z: f64) -> f64 {
    bessel_j_pair(m, z).0
}

/// `(J_m(z), J_{m+1}(z))`.
pub fn bessel_j_pair(m: usize, z: f64) -> (f64, f64) {
    if z < SERIES_LIMIT {
        (j_series(m, z), j_series(m + 1, z))
    } else {
        j_miller(m, z)
    }
}

/// `J_m'(z) = (m / z) J_m - J_{m+1}`.
pub fn bessel_j_deriv(m: usize, z: f64) -> f64 {
    if z == 0.0 {
        return if m == 1 { 0.5 } else { 0.0 };
    }
    let (a, b) = bessel_j_pair(m, z);
    m as f64 / z * a - b
}

fn j_series(m: usize, z: f64) -> f64 {
    let t = -0.25 * z * z;
    let mut term = (0..m).fold(1.0, |acc, k| acc * 0.5 * z / (k + 1) as f64);
    let mut sum = term;
    for k in 1..60 {
        term *= t / (k as f64 * (m + k) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Backward recurrence normalized by `J_0 + 2 sum J_{2k} = 1`.
fn j_miller(m: usize, z: f64) -> (f64, f64) {
    let top = (m + 1).max(z as usize);
    // start well above the turning point so the minimal solution dominates
    let mut n = top + 30 + (60.0 * top as f64).sqrt() as usize;
    n += n % 2;
    let (mut jp, mut j) = (0.0f64, 1e-300f64);
    let (mut jm, mut jm1) = (0.0, 0.0);
    let mut norm = 0.0;
    for k in (1..=n).rev() {
        let jn = 2.0 * k as f64 / z * j - jp;
        jp = j;
        j = jn;
        // j now holds the unnormalized J_{k-1}
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp *= 1e-250;
            jm *= 1e-250;
            jm1 *= 1e-250;
            norm *= 1e-250;
        }
        if k - 1 == m {
            jm = j;
        }
        if k - 1 == m + 1 {
            jm1 = j;
        }
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * j;
        }
    }
    norm += j;
    (jm / norm, jm1 / norm)
}

/// `I_m(x)` by its power series; intended for moderate `|x|`.
pub fn bessel_i(m: usize, x: f64) -> f64 {
    let t = 0.25 * x * x;
    let mut term = (0..m).fold(1.0, |acc, k| acc * 0.5 * x / (k + 1) as f64);
    let mut sum = term;
    for k in 1..200 {
        term *= t / (k as f64 * (m + k) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// McMahon expansion of the `j`-th positive zero of `J_m`, accurate for `j >> m`.
pub fn mcmahon_zero(m: usize, j: usize) -> f64 {
    let beta = (j as f64 + 0.5 * m as f64 - 0.25) * PI;
    let mu = 4.0 * (m * m) as f64;
    let b8 = 8.0 * beta;
    beta - (mu - 1.0) / b8
        - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * b8.powi(3))
        - 32.0 * (mu - 1.0) * (83.0 * mu * mu - 982.0 * mu + 3779.0) / (15.0 * b8.powi(5))
}

/// First `count` positive zeros of `J_m`, each with `|J_m(k)| < 1e-12`.
///
/// Newton from an asymptotic guess; the result is accepted only if no sign change
/// of `J_m` lies between it and the previous zero, otherwise the zero is bracketed
/// by scanning and bisected.
pub fn bessel_zeros(m: usize, count: usize) -> Result<Vec<f64>> {
    let mut zeros: Vec<f64> = Vec::with_capacity(count);
    let mf = m as f64;
    for j in 1..=count {
        let prev = zeros.last().copied().unwrap_or(0.0);
        let guess = match j {
            1 if m == 0 => 2.404_825_557_695_773,
            1 => mf + 1.855_757_1 * mf.cbrt() + 1.033_150 / mf.cbrt(),
            _ if (j as f64) > mf => mcmahon_zero(m, j),
            _ => {
                let spacing = if j >= 3 { prev - zeros[j - 3] } else { PI };
                prev + spacing
            }
        };
        let k = match newton(m, guess) {
            Some(k) if is_next_zero(m, prev, k) => k,
            _ => bracket_next(m, prev)?,
        };
        if bessel_j(m, k).abs() >= 1e-12 {
            return Err(Error::BesselZero(format!("J_{m} residual {:e} at zero {j}", bessel_j(m, k))));
        }
        zeros.push(k);
    }
    Ok(zeros)
}

fn newton(m: usize, mut k: f64) -> Option<f64> {
    for _ in 0..50 {
        let (a, b) = bessel_j_pair(m, k);
        let d = m as f64 / k * a - b;
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        let step = a / d;
        // a step longer than half the zero spacing has lost the basin
        if step.abs() > 1.5 {
            return None;
        }
        k -= step;
        if step.abs() <= 1e-15 * k {
            return Some(k);
        }
    }
    (bessel_j(m, k).abs() < 1e-13).then_some(k)
}

/// Zeros of `J_m` are more than `2` apart, so sampling at `0.5` sees every sign change.
fn is_next_zero(m: usize, prev: f64, k: f64) -> bool {
    let lo = if prev == 0.0 { (m as f64).max(1e-3) } else { prev + 1e-6 };
    if k <= lo || k < m as f64 {
        return false;
    }
    let mut x = lo;
    let mut fx = bessel_j(m, x);
    while x + 0.5 < k - 1e-6 {
        let y = x + 0.5;
        let fy = bessel_j(m, y);
        if fx * fy < 0.0 {
            return false;
        }
        x = y;
        fx = fy;
    }
    true
}

fn bracket_next(m: usize, prev: f64) -> Result<f64> {
    let mut a = if prev == 0.0 { (m as f64).max(1e-3) } else { prev + 1e-6 };
    let mut fa = bessel_j(m, a);
    for _ in 0..10_000 {
        let b = a + 0.25;
        let fb = bessel_j(m, b);
        if fa * fb <= 0.0 {
            let (mut lo, mut hi, mut flo) = (a, b, fa);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let fm = bessel_j(m, mid);
                if flo * fm <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fm;
                }
                if hi - lo <= 1e-15 * hi {
                    break;
                }
            }
            return Ok(newton(m, 0.5 * (lo + hi)).unwrap_or(0.5 * (lo + hi)));
        }
        a = b;
        fa = fb;
    }
    Err(Error::NewtonFailed(format!("no sign change of J_{m} after {prev}")))
}

/// Modified spherical Bessel functions scaled by `exp(-z)`: `(e^-z i0(z), e^-z i1(z))`.
pub fn sph_i01_scaled(z: f64) -> (f64, f64) {
    if z < SERIES_LIMIT {
        let e = (-z).exp();
        return (e * sph_i_series(0, z), e * sph_i_series(1, z));
    }
    let e2 = (-2.0 * z).exp();
    ((1.0 - e2) / (2.0 * z), ((z - 1.0) + (z + 1.0) * e2) / (2.0 * z * z))
}

/// `i_n(z) = z^n sum_k (z^2/2)^k / (k! (2n + 2k + 1)!!)`.
pub fn sph_i_series(n: usize, z: f64) -> f64 {
    let t = 0.5 * z * z;
    let mut term = z.powi(n as i32) / (1..=n).fold(1.0, |acc, k| acc * (2 * k + 1) as f64);
    let mut sum = term;
    for k in 1..100 {
        term *= t / (k as f64 * (2 * (n + k) + 1) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Hankel expansion, an independent check of the recurrence at large argument.
    fn j_hankel(m: usize, z: f64) -> f64 {
        let mu = 4.0 * (m * m) as f64;
        let (mut p, mut q) = (0.0, 0.0);
        let mut term = 1.0;
        for k in 0..30 {
            if k > 0 {
                term *= (mu - ((2 * k - 1) * (2 * k - 1)) as f64) / (k as f64 * 8.0 * z);
            }
            if term.abs() < 1e-18 {
                break;
            }
            match k % 4 {
                0 => p += term,
                1 => q += term,
                2 => p -= term,
                _ => q -= term,
            }
        }
        let chi = z - (0.5 * m as f64 + 0.25) * PI;
        (2.0 / (PI * z)).sqrt() * (p * chi.cos() - q * chi.sin())
    }

    #[test]
    fn values_against_references() {
        assert!((bessel_j(1, 1.0) - 0.440_050_585_744_933_55).abs() < 1e-15);
        assert!((bessel_j(5, 30.0) + 0.143_240_295_512_077_06).abs() < 1e-14);
        assert!((bessel_j(25, 100.0) - 0.078_504_273_355_994_14).abs() < 1e-13);
        for &(m, z) in &[(0usize, 200.5), (3, 150.0), (10, 400.0)] {
            assert!((bessel_j(m, z) - j_hankel(m, z)).abs() < 1e-14, "m={m} z={z}");
        }
        // series and recurrence agree across the switch
        for m in 0..6 {
            assert!((j_series(m, 2.0) - j_miller(m, 2.0).0).abs() < 1e-14);
        }
        assert!((bessel_i(0, 1.0) - 1.266_065_877_752_008_4).abs() < 1e-15);
    }

    #[test]
    fn zeros_examples() {
        let z0 = bessel_zeros(0, 60).unwrap();
        assert!((z0[0] - 2.404_825_557_695_773).abs() < 1e-10);
        // k - (j - 1/4) pi decays like 1 / (8 beta): 2.0e-3 at j = 20, below 1e-3 from j = 41
        let diff = |j: usize| z0[j - 1] - (j as f64 - 0.25) * PI;
        assert!((diff(20) - 1.0 / (8.0 * 19.75 * PI)).abs() < 1e-6);
        assert!(diff(40) > 1e-3 && diff(41) < 1e-3 && diff(60) < diff(41));
        let z25 = bessel_zeros(25, 4).unwrap();
        for (a, b) in z25.iter().zip([30.779_039_19, 35.560_573_87, 39.761_790_13, 43.686_033_57]) {
            assert!((a - b).abs() < 1e-7);
        }
        for m in 0..30 {
            let z = bessel_zeros(m, 12).unwrap();
            assert!(z[0] > m as f64);
            assert!(z.windows(2).all(|w| w[1] > w[0] + 2.0));
        }
    }

    #[test]
    fn spherical_i1_small_argument() {
        let z = 1e-3;
        let (_, i1) = sph_i01_scaled(z);
        assert!((i1 * z.exp() - z / 3.0).abs() < 1e-10);
        let (s0, s1) = sph_i01_scaled(3.0);
        assert!((s0 * 3f64.exp() - 3f64.sinh() / 3.0).abs() < 1e-14);
        assert!((s1 * 3f64.exp() - (3.0 * 3f64.cosh() - 3f64.sinh()) / 9.0).abs() < 1e-13);
    }
}
