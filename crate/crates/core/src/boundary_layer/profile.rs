use crate::quadrature::adaptive_gauss;
use crate::vec3::Jet;

/// C2 quintic-smoothstep cutoff: `psi = 1` on `[-r0, r0]`, `0` outside `(-2 r0, 2 r0)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutoffProfile {
    pub r0: f64,
}

impl CutoffProfile {
    pub fn new(r0: f64) -> Self {
        Self { r0 }
    }

    /// `psi`, `psi'`, `psi''` at `r`.
    pub fn psi(&self, r: f64) -> Jet {
        let r0 = self.r0;
        let a = r.abs();
        if a <= r0 {
            return Jet::constant(1.0);
        }
        if a >= 2.0 * r0 {
            return Jet::constant(0.0);
        }
        // t runs 0 -> 1 from the outer edge towards the plateau
        let t = (2.0 * r0 - a) / r0;
        let v = t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
        let dt = 30.0 * t * t * (1.0 - t) * (1.0 - t);
        let ddt = 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t);
        let s = if r < 0.0 { 1.0 } else { -1.0 };
        Jet::new(v, s * dt / r0, ddt / (r0 * r0))
    }

    /// `f = exp(r / lambda) psi(r)` with two derivatives.
    pub fn f(&self, r: f64, lambda: f64) -> Jet {
        let p = self.psi(r);
        let x = (r / lambda).exp();
        Jet::new(
            x * p.v,
            x * (p.v / lambda + p.d),
            x * (p.v / (lambda * lambda) + 2.0 * p.d / lambda + p.dd),
        )
    }
}

/// `E(r) = int_{-inf}^r exp(s / lambda) psi(s) ds`.
pub fn e_profile(r: f64, lambda: f64, cutoff: &CutoffProfile) -> f64 {
    let r0 = cutoff.r0;
    if r <= -2.0 * r0 {
        return 0.0;
    }
    let g = |s: f64| (s / lambda).exp() * cutoff.psi(s).v;
    let upper = r.min(-r0);
    let ramp = adaptive_gauss(&g, -2.0 * r0, upper, 1e-16 * lambda);
    if r <= -r0 {
        return ramp;
    }
    // psi = 1 on [-r0, r0]
    let plateau_end = r.min(r0);
    let mut e = ramp + lambda * ((plateau_end / lambda).exp() - (-r0 / lambda).exp());
    if r > r0 {
        e += adaptive_gauss(&g, r0, r.min(2.0 * r0), 1e-16 * lambda * (r0 / lambda).exp());
    }
    e
}

/// Value and two derivatives of `E` at `r`.
pub fn e_jet(r: f64, lambda: f64, cutoff: &CutoffProfile) -> Jet {
    let f = cutoff.f(r, lambda);
    Jet::new(e_profile(r, lambda, cutoff), f.v, f.d)
}
