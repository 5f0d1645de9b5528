//! Boundary-layer 2-form `beta_lambda` on the inner collar of the surface.
//!
//! Collar coordinates `x = X(u, v) + rho n(u, v)`, `rho in [-2 r0, 0]`, with `n`
//! the outward normal. 2-forms are handled through their vector proxies.

pub mod beta;
pub mod norms;
pub mod profile;

pub use beta::{build_beta, build_beta_checked, curl_of, BetaField, Slice};
pub use norms::{
    collar_l2_difference, collar_norms, eval_current, pair_with_testform, CollarNorms, CollarPoint, Pairing,
};
pub use profile::{e_jet, e_profile, CutoffProfile};
