//! Semi-analytic problems used as convergence oracles.

pub mod bessel;
pub mod disk;
pub mod london;
