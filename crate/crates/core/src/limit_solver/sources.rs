use std::f64::consts::PI;

use crate::error::Result;
use crate::geometry::SurfaceGrid;
use crate::layer_potentials::{biot_savart, LoopSource};
use crate::vec3::Vec3;

/// Elementary source of an incoming field.
#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    Uniform { b: Vec3 },
    /// `B = (3 (m . r^) r^ - m) / (4 pi |r|^3)`
    Dipole { location: Vec3, moment: Vec3 },
    Loop(LoopSource),
    /// Synthetic divergent field `q r / (4 pi |r|^3)`, for compatibility tests only.
    Monopole { location: Vec3, charge: f64 },
}

impl Source {
    pub fn eval(&self, x: &Vec3) -> Result<Vec3> {
        match self {
            Source::Uniform { b } => Ok(*b),
            Source::Dipole { location, moment } => {
                let r = x - location;
                let d = r.norm();
                let rh = r / d;
                Ok((rh * (3.0 * moment.dot(&rh)) - moment) / (4.0 * PI * d * d * d))
            }
            Source::Loop(lp) => biot_savart(lp, x),
            Source::Monopole { location, charge } => {
                let r = x - location;
                let d = r.norm();
                Ok(r * (*charge / (4.0 * PI * d * d * d)))
            }
        }
    }
}

/// Which side of the superconductor the sources sit on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SourceRegion {
    #[default]
    Outer,
    Inner,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct IncomingField {
    pub sources: Vec<Source>,
    pub region: SourceRegion,
}

impl IncomingField {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn uniform(b: Vec3) -> Self {
        Self { sources: vec![Source::Uniform { b }], region: SourceRegion::Outer }
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
    }

    pub fn eval(&self, x: &Vec3) -> Result<Vec3> {
        let mut b = Vec3::zeros();
        for s in &self.sources {
            b += s.eval(x)?;
        }
        Ok(b)
    }

    pub fn on_grid(&self, grid: &SurfaceGrid) -> Result<Vec<Vec3>> {
        grid.nodes.iter().map(|n| self.eval(&n.chart.x)).collect()
    }

    pub fn scaled(&self, s: f64) -> Self {
        let sources = self
            .sources
            .iter()
            .map(|src| match src {
                Source::Uniform { b } => Source::Uniform { b: b * s },
                Source::Dipole { location, moment } => Source::Dipole { location: *location, moment: moment * s },
                Source::Loop(lp) => Source::Loop(lp.with_current(lp.current * s)),
                Source::Monopole { location, charge } => Source::Monopole { location: *location, charge: charge * s },
            })
            .collect();
        Self { sources, region: self.region }
    }

    pub fn combined(&self, other: &Self) -> Self {
        let mut sources = self.sources.clone();
        sources.extend(other.sources.iter().cloned());
        Self { sources, region: self.region }
    }
}

/// Net flux `int B^In . n dS` of the incoming field through a closed surface.
pub fn check_compatibility(grid_inner: &SurfaceGrid, incoming: &IncomingField) -> Result<f64> {
    let w = grid_inner.weights();
    let mut s = 0.0;
    for (k, nd) in grid_inner.nodes.iter().enumerate() {
        s += w[k] * incoming.eval(&nd.chart.x)?.dot(&nd.n);
    }
    Ok(s)
}
