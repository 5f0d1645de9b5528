use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares line through `(log x, log y)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

impl SlopeFit {
    /// `|slope - target| <= tol` and `r2 > 0.98`.
    pub fn within(&self, target: f64, tol: f64) -> bool {
        (self.slope - target).abs() <= tol && self.r2 > 0.98
    }
}

pub fn fit_slope(pairs: &[(f64, f64)]) -> Result<SlopeFit> {
    if pairs.len() < 4 {
        return Err(Error::SlopeData(format!("{} points; at least 4 needed", pairs.len())));
    }
    if let Some(p) = pairs.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(Error::SlopeData(format!("nonpositive pair {p:?}")));
    }
    let n = pairs.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = pairs.iter().map(|(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::SlopeData("all abscissae equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    // a constant series is fitted exactly
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(SlopeFit { slope, intercept, r2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_laws() {
        let xs = [1.0, 0.5, 0.25, 0.125, 0.0625];
        let f = fit_slope(&xs.map(|x| (x, x * x))).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.r2 - 1.0).abs() < 1e-12);
        let g = fit_slope(&xs.map(|x| (x, 3.0 * x.sqrt()))).unwrap();
        assert!((g.slope - 0.5).abs() < 1e-12 && (g.intercept - 3f64.ln()).abs() < 1e-12);
        assert!(fit_slope(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0), (4.0, 2.0)]).is_err());
        assert!(fit_slope(&[(1.0, 1.0), (2.0, 1.0)]).is_err());
    }
}
