//! Config-driven experiment runner.
//!
//! Each run reads a [`RunConfig`], writes CSV data and a `manifest.json`
//! ([`RunManifest`]) into the output directory, and passes iff every recorded
//! check passes.

pub mod config;
pub mod fit;
pub mod manifest;
pub mod output;
pub mod presets;
pub mod run;

pub use config::{ExperimentKind, RunConfig};
pub use fit::{fit_slope, SlopeFit};
pub use manifest::{Bound, Check, RunManifest};
pub use presets::{preset, PRESETS};
pub use run::run;

/// Thread count from `MEISSNER_THREADS`, if set to a positive integer.
pub fn env_threads() -> Option<usize> {
    std::env::var("MEISSNER_THREADS").ok()?.parse().ok().filter(|n| *n > 0)
}
