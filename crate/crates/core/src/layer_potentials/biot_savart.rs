use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::Curve;
use crate::vec3::Vec3;

/// Closed filament carrying a steady current.
#[derive(Clone, Debug, PartialEq)]
pub struct LoopSource {
    pub curve: Curve,
    pub current: f64,
    samples: Vec<(Vec3, Vec3)>,
    spacing: f64,
}

impl LoopSource {
    pub fn new(curve: Curve, current: f64, n_t: usize) -> Self {
        let samples = curve.samples(n_t);
        let h = 2.0 * PI / n_t as f64;
        let spacing = samples.iter().map(|(_, d)| d.norm() * h).fold(0.0, f64::max);
        Self { curve, current, samples, spacing }
    }

    pub fn reversed(&self) -> Self {
        Self { current: -self.current, ..self.clone() }
    }

    pub fn with_current(&self, current: f64) -> Self {
        Self { current, ..self.clone() }
    }

    pub fn n_t(&self) -> usize {
        self.samples.len()
    }
}

/// `(I / 4 pi) oint dl x (x - y) / |x - y|^3` by the periodic trapezoid rule.
pub fn biot_savart(lp: &LoopSource, x: &Vec3) -> Result<Vec3> {
    let h = 2.0 * PI / lp.samples.len() as f64;
    let mut b = Vec3::zeros();
    for (y, dy) in &lp.samples {
        let r = x - y;
        let d = r.norm();
        if d < lp.spacing {
            return Err(Error::TooClose(format!("distance {d:.3e} to loop below spacing {:.3e}", lp.spacing)));
        }
        b += dy.cross(&r) / (d * d * d);
    }
    Ok(b * (lp.current * h / (4.0 * PI)))
}
