use crate::error::{Error, Result};
use crate::vec3::{vec3, Vec3};

/// Non-zero coefficients `(i, j, delta_ij)` of the twisted torus.
pub const TWISTED_TORUS_COEFFS: [(i32, i32, f64); 7] = [
    (-1, 1, 0.17),
    (-1, 0, 0.11),
    (0, 0, 1.0),
    (1, 0, 4.5),
    (2, 0, -0.25),
    (0, 1, 0.07),
    (2, 1, -0.45),
];

/// Chart value with first and second parameter derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChartPoint {
    pub x: Vec3,
    pub xu: Vec3,
    pub xv: Vec3,
    pub xuu: Vec3,
    pub xuv: Vec3,
    pub xvv: Vec3,
}

impl ChartPoint {
    pub fn normal_raw(&self) -> Vec3 {
        self.xu.cross(&self.xv)
    }

    pub fn normal(&self) -> Vec3 {
        self.normal_raw().normalize()
    }

    /// Parameter derivatives of the unit normal.
    pub fn normal_derivatives(&self) -> (Vec3, Vec3) {
        let nr = self.normal_raw();
        let len = nr.norm();
        let n = nr / len;
        let nu_raw = self.xuu.cross(&self.xv) + self.xu.cross(&self.xuv);
        let nv_raw = self.xuv.cross(&self.xv) + self.xu.cross(&self.xvv);
        (
            (nu_raw - n * n.dot(&nu_raw)) / len,
            (nv_raw - n * n.dot(&nv_raw)) / len,
        )
    }
}

/// Smooth closed surface given by an analytic chart.
///
/// Tori are doubly periodic in `(u, v)` with `u` the toroidal and `v` the
/// poloidal angle. The sphere uses colatitude `u` in `(0, pi)` and longitude `v`.
#[derive(Clone, Debug, PartialEq)]
pub enum ParamSurface {
    Sphere { radius: f64 },
    TorusRev { major: f64, minor: f64 },
    TwistedTorus { coeffs: Vec<(i32, i32, f64)> },
}

/// Shape parameters accepted by [`build_surface`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SurfaceParams {
    pub radius: Option<f64>,
    pub major: Option<f64>,
    pub minor: Option<f64>,
    pub coeffs: Option<Vec<(i32, i32, f64)>>,
}

pub fn build_surface(kind: &str, params: &SurfaceParams) -> Result<ParamSurface> {
    match kind {
        "sphere" => {
            let r = params.radius.unwrap_or(1.0);
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::DegenerateParameters(format!("sphere radius {r}")));
            }
            Ok(ParamSurface::Sphere { radius: r })
        }
        "torus_rev" => {
            let (big, small) = match (params.major, params.minor) {
                (Some(a), Some(b)) => (a, b),
                _ => {
                    return Err(Error::DegenerateParameters(
                        "torus_rev needs major and minor radii".into(),
                    ))
                }
            };
            if !(small > 0.0) || !(big > small) || !big.is_finite() {
                return Err(Error::DegenerateParameters(format!("R = {big}, r = {small}")));
            }
            Ok(ParamSurface::TorusRev { major: big, minor: small })
        }
        "twisted_torus" => {
            let coeffs = params.coeffs.clone().unwrap_or_else(|| TWISTED_TORUS_COEFFS.to_vec());
            if !coeffs.iter().any(|&(i, _, d)| i != 1 && d != 0.0)
                || !coeffs.iter().any(|&(i, j, d)| i == 1 && j == 0 && d != 0.0)
            {
                return Err(Error::DegenerateParameters(
                    "twisted torus needs a major-circle and a cross-section term".into(),
                ));
            }
            Ok(ParamSurface::TwistedTorus { coeffs })
        }
        other => Err(Error::UnknownKind(other.to_string())),
    }
}

impl ParamSurface {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::Sphere { .. } => "sphere",
            Self::TorusRev { .. } => "torus_rev",
            Self::TwistedTorus { .. } => "twisted_torus",
        }
    }

    pub fn is_sphere(&self) -> bool {
        matches!(self, Self::Sphere { .. })
    }

    /// Genus of the surface.
    pub fn genus(&self) -> usize {
        if self.is_sphere() {
            0
        } else {
            1
        }
    }

    /// Whether rotating the `u` (tori) or `v` (sphere) origin is a symmetry.
    pub fn rotation_axis_param(&self) -> Option<Axis> {
        match self {
            Self::Sphere { .. } => Some(Axis::V),
            Self::TorusRev { .. } => Some(Axis::U),
            Self::TwistedTorus { .. } => None,
        }
    }

    pub fn eval(&self, u: f64, v: f64) -> ChartPoint {
        match self {
            Self::Sphere { radius } => sphere_chart(*radius, u, v),
            Self::TorusRev { major, minor } => torus_chart(*major, *minor, u, v),
            Self::TwistedTorus { coeffs } => twisted_chart(coeffs, u, v),
        }
    }

    pub fn point(&self, u: f64, v: f64) -> Vec3 {
        self.eval(u, v).x
    }

    pub fn normal(&self, u: f64, v: f64) -> Vec3 {
        self.eval(u, v).normal()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    U,
    V,
}

fn sphere_chart(r: f64, th: f64, ph: f64) -> ChartPoint {
    let (st, ct) = th.sin_cos();
    let (sp, cp) = ph.sin_cos();
    ChartPoint {
        x: vec3(r * st * cp, r * st * sp, r * ct),
        xu: vec3(r * ct * cp, r * ct * sp, -r * st),
        xv: vec3(-r * st * sp, r * st * cp, 0.0),
        xuu: vec3(-r * st * cp, -r * st * sp, -r * ct),
        xuv: vec3(-r * ct * sp, r * ct * cp, 0.0),
        xvv: vec3(-r * st * cp, -r * st * sp, 0.0),
    }
}

fn torus_chart(big: f64, small: f64, u: f64, v: f64) -> ChartPoint {
    let (su, cu) = u.sin_cos();
    let (sv, cv) = v.sin_cos();
    let rho = big + small * cv;
    ChartPoint {
        x: vec3(rho * cu, rho * su, small * sv),
        xu: vec3(-rho * su, rho * cu, 0.0),
        xv: vec3(-small * sv * cu, -small * sv * su, small * cv),
        xuu: vec3(-rho * cu, -rho * su, 0.0),
        xuv: vec3(small * sv * su, -small * sv * cu, 0.0),
        xvv: vec3(-small * cv * cu, -small * cv * su, -small * sv),
    }
}

/// `X = sum delta_ij [cos u cos t, sin u cos t, sin t]` with `t = (1 - i) v + j u`.
fn twisted_chart(coeffs: &[(i32, i32, f64)], u: f64, v: f64) -> ChartPoint {
    let (su, cu) = u.sin_cos();
    let z = Vec3::zeros();
    let mut c = ChartPoint { x: z, xu: z, xv: z, xuu: z, xuv: z, xvv: z };
    for &(i, j, d) in coeffs {
        let a = (1 - i) as f64;
        let b = j as f64;
        let (st, ct) = (a * v + b * u).sin_cos();
        let p = vec3(cu * ct, su * ct, st);
        let p_f = vec3(-su * ct, cu * ct, 0.0);
        let p_t = vec3(-cu * st, -su * st, ct);
        let p_ff = vec3(-cu * ct, -su * ct, 0.0);
        let p_ft = vec3(su * st, -cu * st, 0.0);
        let p_tt = vec3(-cu * ct, -su * ct, -st);
        c.x += d * p;
        c.xu += d * (p_f + b * p_t);
        c.xv += d * a * p_t;
        c.xuu += d * (p_ff + 2.0 * b * p_ft + b * b * p_tt);
        c.xuv += d * a * (p_ft + b * p_tt);
        c.xvv += d * a * a * p_tt;
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(s: &ParamSurface, u: f64, v: f64) {
        let h = 1e-5;
        let c = s.eval(u, v);
        let du = (s.eval(u + h, v).x - s.eval(u - h, v).x) / (2.0 * h);
        let dv = (s.eval(u, v + h).x - s.eval(u, v - h).x) / (2.0 * h);
        let duu = (s.eval(u + h, v).xu - s.eval(u - h, v).xu) / (2.0 * h);
        let duv = (s.eval(u, v + h).xu - s.eval(u, v - h).xu) / (2.0 * h);
        let dvv = (s.eval(u, v + h).xv - s.eval(u, v - h).xv) / (2.0 * h);
        for (a, b) in [(c.xu, du), (c.xv, dv), (c.xuu, duu), (c.xuv, duv), (c.xvv, dvv)] {
            assert!((a - b).norm() < 1e-8 * (1.0 + a.norm()), "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn chart_derivatives_match_finite_differences() {
        let tw = build_surface("twisted_torus", &SurfaceParams::default()).unwrap();
        let tr = build_surface(
            "torus_rev",
            &SurfaceParams { major: Some(2.0), minor: Some(1.0), ..Default::default() },
        )
        .unwrap();
        let sp = build_surface("sphere", &SurfaceParams::default()).unwrap();
        for &(u, v) in &[(0.3, 1.1), (2.0, 4.0), (5.5, 0.2)] {
            fd_check(&tw, u, v);
            fd_check(&tr, u, v);
            fd_check(&sp, 0.5 + u / 7.0, v);
        }
    }

    #[test]
    fn twisted_torus_origin_value() {
        let tw = build_surface("twisted_torus", &SurfaceParams::default()).unwrap();
        let x = tw.point(0.0, 0.0);
        assert!((x - vec3(5.15, 0.0, 0.0)).norm() < 1e-14);
        // outward at the outer equator
        assert!(tw.normal(0.0, 0.0).x > 0.9);
    }

    #[test]
    fn torus_origin_and_normal() {
        let tr = ParamSurface::TorusRev { major: 2.0, minor: 1.0 };
        assert!((tr.point(0.0, 0.0) - vec3(3.0, 0.0, 0.0)).norm() < 1e-15);
        assert!((tr.normal(0.0, 0.0) - vec3(1.0, 0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn rejects_bad_parameters() {
        let bad = SurfaceParams { major: Some(1.0), minor: Some(1.0), ..Default::default() };
        assert!(matches!(build_surface("torus_rev", &bad), Err(Error::DegenerateParameters(_))));
        let neg = SurfaceParams { major: Some(2.0), minor: Some(-0.5), ..Default::default() };
        assert!(build_surface("torus_rev", &neg).is_err());
        assert!(matches!(build_surface("klein", &bad), Err(Error::UnknownKind(_))));
    }

    #[test]
    fn normal_derivative_matches_difference() {
        let tw = build_surface("twisted_torus", &SurfaceParams::default()).unwrap();
        let (u, v, h) = (1.3, 2.1, 1e-5);
        let (nu, nv) = tw.eval(u, v).normal_derivatives();
        let fu = (tw.normal(u + h, v) - tw.normal(u - h, v)) / (2.0 * h);
        let fv = (tw.normal(u, v + h) - tw.normal(u, v - h)) / (2.0 * h);
        assert!((nu - fu).norm() < 1e-8);
        assert!((nv - fv).norm() < 1e-8);
    }
}
