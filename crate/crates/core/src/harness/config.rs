//! Run configuration, read from TOML.
//!
//! ```toml
//! kind = "solve"            # validate | solve | betalayer | spectra | disk | sphere | convergence
//! seed = 7
//!
//! [geometry]
//! kind = "torus_rev"        # sphere | torus_rev | twisted_torus
//! major = 2.0
//! minor = 1.0
//! [geometry.inner]          # optional: region between two nested surfaces
//! kind = "torus_rev"
//! major = 2.0
//! minor = 0.5
//!
//! [[sources]]
//! type = "uniform"          # uniform | dipole | loop
//! b = [0.0, 0.0, 1.0]
//!
//! [flux]
//! region = "exterior"       # exterior | interior (single surface only)
//! a = [0.5]                 # A-cycle circulations, exterior (outer surface of a shell)
//! b = []                    # B-cycle circulations, interior (inner surface of a shell)
//!
//! [numeric]
//! nu = 32
//! nv = 24
//! r0 = 0.25
//! lambdas = [0.0625, 0.03125]
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{build_surface, Curve, ParamSurface, SurfaceParams};
use crate::layer_potentials::LoopSource;
use crate::limit_solver::{FluxSpec, IncomingField, Source, SourceRegion};
use crate::vec3::{vec3, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Validate,
    Solve,
    Betalayer,
    Spectra,
    Disk,
    Sphere,
    Convergence,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        Self::Validate,
        Self::Solve,
        Self::Betalayer,
        Self::Spectra,
        Self::Disk,
        Self::Sphere,
        Self::Convergence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Validate => "validate",
            Self::Solve => "solve",
            Self::Betalayer => "betalayer",
            Self::Spectra => "spectra",
            Self::Disk => "disk",
            Self::Sphere => "sphere",
            Self::Convergence => "convergence",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub major: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minor: Option<f64>,
    /// `(i, j, Delta_ij)` triples of the twisted-torus chart.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<(i32, i32, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner: Option<Box<GeometryConfig>>,
}

impl GeometryConfig {
    pub fn surface(&self) -> Result<ParamSurface> {
        let p = SurfaceParams { radius: self.radius, major: self.major, minor: self.minor, coeffs: self.coeffs.clone() };
        build_surface(&self.kind, &p).map_err(|e| Error::Config(format!("geometry: {e}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum SourceConfig {
    Uniform {
        b: [f64; 3],
    },
    Dipole {
        location: [f64; 3],
        moment: [f64; 3],
    },
    /// Circular filament in the plane orthogonal to `normal`.
    Loop {
        center: [f64; 3],
        radius: f64,
        #[serde(default = "default_normal")]
        normal: [f64; 3],
        current: f64,
        #[serde(default = "default_loop_samples")]
        samples: usize,
    },
}

fn default_normal() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

fn default_loop_samples() -> usize {
    512
}

fn v3(a: [f64; 3]) -> Vec3 {
    vec3(a[0], a[1], a[2])
}

impl SourceConfig {
    pub fn source(&self) -> Result<Source> {
        Ok(match self {
            Self::Uniform { b } => Source::Uniform { b: v3(*b) },
            Self::Dipole { location, moment } => Source::Dipole { location: v3(*location), moment: v3(*moment) },
            Self::Loop { center, radius, normal, current, samples } => {
                let n = v3(*normal);
                if !(n.norm() > 0.0 && *radius > 0.0 && *samples >= 8) {
                    return Err(Error::Config(format!("loop: radius {radius}, normal {n:?}, {samples} samples")));
                }
                let n = n.normalize();
                let seed = if n.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
                let e1 = (seed - n * seed.dot(&n)).normalize();
                let e2 = n.cross(&e1);
                Source::Loop(LoopSource::new(Curve::Circle { center: v3(*center), e1, e2, radius: *radius }, *current, *samples))
            }
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    #[default]
    Exterior,
    Interior,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxConfig {
    #[serde(default)]
    pub region: Side,
    #[serde(default)]
    pub a: Vec<f64>,
    #[serde(default)]
    pub b: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub identity: f64,
    pub calderon: f64,
    pub boundary_condition: f64,
    pub circulation: f64,
    pub trace: f64,
    pub outer_norm: f64,
    pub spectrum: f64,
    pub closedness: f64,
    pub dipole: f64,
    /// Half-width of the accepted band around each target slope.
    pub slope: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            identity: 1e-8,
            calderon: 1e-6,
            boundary_condition: 1e-6,
            circulation: 1e-6,
            trace: 1e-6,
            outer_norm: 1e-8,
            spectrum: 1e-6,
            closedness: 1e-8,
            dipole: 1e-6,
            slope: 0.05,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericConfig {
    pub nu: usize,
    pub nv: usize,
    /// Collar half-width; `reach / 4` when absent.
    pub r0: Option<f64>,
    pub lambdas: Vec<f64>,
    /// Largest spherical-harmonic degree compared in sphere spectra.
    pub max_degree: usize,
    pub disk_orders: usize,
    pub disk_zeros: usize,
    /// Random probe points for the equilibrium-potential check.
    pub probes: usize,
    pub tolerances: Tolerances,
}

impl Default for NumericConfig {
    fn default() -> Self {
        Self {
            nu: 32,
            nv: 32,
            r0: None,
            lambdas: Vec::new(),
            max_degree: 8,
            disk_orders: 25,
            disk_zeros: 64,
            probes: 4,
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceSide {
    #[default]
    Outer,
    Inner,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometryConfig>,
    #[serde(default)]
    pub sources: Vec<SourceConfig>,
    /// Side of the body on which the sources sit.
    #[serde(default)]
    pub source_side: SourceSide,
    #[serde(default)]
    pub flux: FluxConfig,
    #[serde(default)]
    pub numeric: NumericConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn incoming(&self) -> Result<IncomingField> {
        let sources = self.sources.iter().map(SourceConfig::source).collect::<Result<Vec<_>>>()?;
        let region = match self.source_side {
            SourceSide::Outer => SourceRegion::Outer,
            SourceSide::Inner => SourceRegion::Inner,
        };
        Ok(IncomingField { sources, region })
    }

    pub fn outer_flux(&self) -> FluxSpec {
        FluxSpec { a: self.flux.a.clone(), b: Vec::new() }
    }

    pub fn inner_flux(&self) -> FluxSpec {
        FluxSpec { a: Vec::new(), b: self.flux.b.clone() }
    }

    /// Schema checks that need no computation.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        let n = &self.numeric;
        if n.nu < 4 || n.nv < 4 {
            return bad(format!("grid {}x{} too coarse", n.nu, n.nv));
        }
        if n.lambdas.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return bad(format!("lambdas must be positive: {:?}", n.lambdas));
        }
        if let Some(r0) = n.r0 {
            if !(r0 > 0.0) {
                return bad(format!("r0 = {r0}"));
            }
        }
        let geometry = match (&self.geometry, self.kind) {
            (None, ExperimentKind::Disk) => None,
            (None, k) => return bad(format!("{} needs a [geometry] block", k.name())),
            (Some(g), _) => Some(g),
        };
        if let Some(g) = geometry {
            let outer = g.surface()?;
            if let Some(inner) = &g.inner {
                if inner.inner.is_some() {
                    return bad("at most two nested surfaces".into());
                }
                inner.surface()?;
                if self.flux.region != Side::Exterior {
                    return bad("flux.region applies to single surfaces only".into());
                }
                let ig = inner.surface()?.genus();
                let counts_ok = self.flux.a.len() == outer.genus() && self.flux.b.len() == ig;
                if self.kind == ExperimentKind::Solve && !counts_ok {
                    return bad(format!("shell needs {} a-values and {ig} b-values", outer.genus()));
                }
            }
        }
        let needs_lambdas = matches!(
            self.kind,
            ExperimentKind::Betalayer | ExperimentKind::Disk | ExperimentKind::Sphere | ExperimentKind::Convergence
        );
        if needs_lambdas && n.lambdas.len() < 4 {
            return bad(format!("{} needs at least 4 lambdas", self.kind.name()));
        }
        match self.kind {
            ExperimentKind::Sphere => {
                if !geometry.is_some_and(|g| g.kind == "sphere" && g.inner.is_none()) {
                    return bad("sphere study needs a single sphere geometry".into());
                }
                match self.sources.as_slice() {
                    [SourceConfig::Uniform { b }] if b[0] == 0.0 && b[1] == 0.0 && b[2] > 0.0 => {}
                    _ => return bad("sphere study needs one uniform source along +z".into()),
                }
            }
            ExperimentKind::Disk => {
                if n.disk_orders == 0 || n.disk_zeros < 8 {
                    return bad(format!("disk table {} x {}", n.disk_orders, n.disk_zeros));
                }
            }
            ExperimentKind::Betalayer | ExperimentKind::Convergence => {
                if geometry.is_some_and(|g| g.inner.is_some()) {
                    return bad("boundary-layer sweeps use a single surface".into());
                }
            }
            _ => {}
        }
        for s in &self.sources {
            s.source()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_rejects_unknown_keys() {
        let text = r#"
kind = "solve"
seed = 3
[geometry]
kind = "twisted_torus"
coeffs = [[0, 0, 1.0], [1, 0, 4.5], [0, 1, 0.07]]
[[sources]]
type = "loop"
center = [0.0, 0.0, 3.0]
radius = 1.0
current = 2.0
[flux]
a = [0.5]
"#;
        let c = RunConfig::from_toml(text).unwrap();
        assert_eq!(c.geometry.as_ref().unwrap().coeffs.as_ref().unwrap()[1], (1, 0, 4.5));
        assert!(matches!(c.incoming().unwrap().sources[0], Source::Loop(_)));
        let back = RunConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back, c);

        for bad in [
            text.replace("seed = 3", "seed = 3\ncolour = 1"),
            text.replace("current = 2.0", "current = 2.0\nwidth = 1"),
            text.replace("kind = \"solve\"", "kind = \"plot\""),
            text.replace("[flux]\na = [0.5]", "[numeric]\nnu = 2"),
            text.replace("\"twisted_torus\"", "\"klein\""),
        ] {
            assert!(matches!(RunConfig::from_toml(&bad), Err(Error::Config(_))), "{bad}");
        }
    }
}
