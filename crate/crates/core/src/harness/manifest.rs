use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::fit::SlopeFit;
use crate::error::{Error, Result};

/// Acceptance rule applied to a recorded value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Bound {
    /// `value < limit`
    Below { limit: f64 },
    /// `value > limit`
    Above { limit: f64 },
    /// `value >= limit`
    AtLeast { limit: f64 },
    /// `|value - target| <= tol`
    Within { target: f64, tol: f64 },
    /// A boolean stored as `1` or `0`.
    Holds,
}

impl Bound {
    pub fn accepts(&self, v: f64) -> bool {
        match *self {
            Bound::Below { limit } => v < limit,
            Bound::Above { limit } => v > limit,
            Bound::AtLeast { limit } => v >= limit,
            Bound::Within { target, tol } => (v - target).abs() <= tol,
            Bound::Holds => v == 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: Bound,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageTime {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: RunConfig,
    pub version: String,
    pub threads: usize,
    /// Named residuals of every stage (Gauss, Calderon, circulation, boundary condition, ...).
    pub residuals: BTreeMap<String, f64>,
    pub fits: BTreeMap<String, SlopeFit>,
    pub timings: Vec<StageTime>,
    pub checks: Vec<Check>,
    pub files: Vec<String>,
    /// Set when a numerical stage failed; the run then counts as failed.
    pub error: Option<String>,
}

impl RunManifest {
    pub fn new(config: RunConfig, threads: usize) -> Self {
        Self {
            config,
            version: env!("CARGO_PKG_VERSION").to_string(),
            threads,
            residuals: BTreeMap::new(),
            fits: BTreeMap::new(),
            timings: Vec::new(),
            checks: Vec::new(),
            files: Vec::new(),
            error: None,
        }
    }

    pub fn residual(&mut self, name: &str, value: f64) {
        self.residuals.insert(name.to_string(), value);
    }

    pub fn check(&mut self, name: &str, value: f64, bound: Bound) -> bool {
        let passed = bound.accepts(value);
        self.checks.push(Check { name: name.to_string(), value, bound, passed });
        passed
    }

    pub fn check_flag(&mut self, name: &str, ok: bool) -> bool {
        self.check(name, if ok { 1.0 } else { 0.0 }, Bound::Holds)
    }

    /// Records the fit and two checks: slope within `tol` of `target` and `r2 > 0.98`.
    pub fn check_slope(&mut self, name: &str, fit: SlopeFit, target: f64, tol: f64) -> bool {
        self.fits.insert(name.to_string(), fit);
        let a = self.check(&format!("{name}_slope"), fit.slope, Bound::Within { target, tol });
        let b = self.check(&format!("{name}_r2"), fit.r2, Bound::Above { limit: 0.98 });
        a && b
    }

    pub fn timed<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let t = std::time::Instant::now();
        let out = f();
        self.timings.push(StageTime { stage: stage.to_string(), seconds: t.elapsed().as_secs_f64() });
        out
    }

    pub fn passed(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.passed)
    }

    /// Re-applies every rule to the stored values; must agree with the recorded verdicts.
    pub fn reevaluate(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.bound.accepts(c.value))
    }

    pub fn find(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Io(std::io::Error::other(e)))?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Io(std::io::Error::other(e)))
    }
}
