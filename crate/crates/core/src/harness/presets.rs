//! Bundled configurations, one per acceptance experiment.

use super::config::RunConfig;
use crate::error::{Error, Result};

pub const PRESETS: &[(&str, &str)] = &[
    ("validate_sphere64", include_str!("../../presets/validate_sphere64.toml")),
    ("spectra_sphere", include_str!("../../presets/spectra_sphere.toml")),
    ("spectra_torus", include_str!("../../presets/spectra_torus.toml")),
    ("spectra_nested", include_str!("../../presets/spectra_nested.toml")),
    ("spectra_twisted", include_str!("../../presets/spectra_twisted.toml")),
    ("thinshell_b1", include_str!("../../presets/thinshell_b1.toml")),
    ("solve_sphere_uniform", include_str!("../../presets/solve_sphere_uniform.toml")),
    ("solve_torus_flux", include_str!("../../presets/solve_torus_flux.toml")),
    ("solve_torus_interior", include_str!("../../presets/solve_torus_interior.toml")),
    ("beta_sweep_torus", include_str!("../../presets/beta_sweep_torus.toml")),
    ("sheet_convergence_torus", include_str!("../../presets/sheet_convergence_torus.toml")),
    ("london_sphere", include_str!("../../presets/london_sphere.toml")),
    ("disk_exp", include_str!("../../presets/disk_exp.toml")),
];

pub fn preset_text(name: &str) -> Result<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| Error::Config(format!("unknown preset `{name}`")))
}

pub fn preset(name: &str) -> Result<RunConfig> {
    RunConfig::from_toml(preset_text(name)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates() {
        for (name, _) in PRESETS {
            preset(name).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        assert!(preset("nope").is_err());
    }
}
