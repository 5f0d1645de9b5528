//! Small fixed-size vector helpers shared by every module.

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;

#[inline]
pub fn vec3(x: f64, y: f64, z: f64) -> Vec3 {
    Vec3::new(x, y, z)
}

/// Second-order Taylor jet in one variable: value, first and second derivative.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub d: f64,
    pub dd: f64,
}

impl Jet {
    pub const fn new(v: f64, d: f64, dd: f64) -> Self {
        Self { v, d, dd }
    }

    pub const fn constant(v: f64) -> Self {
        Self { v, d: 0.0, dd: 0.0 }
    }

    pub fn recip(self) -> Self {
        let r = 1.0 / self.v;
        Self {
            v: r,
            d: -self.d * r * r,
            dd: (2.0 * self.d * self.d * r - self.dd) * r * r,
        }
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(self.v * s, self.d * s, self.dd * s)
    }
}

impl std::ops::Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet::new(self.v + o.v, self.d + o.d, self.dd + o.dd)
    }
}

impl std::ops::Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet::new(self.v - o.v, self.d - o.d, self.dd - o.dd)
    }
}

impl std::ops::Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet::new(
            self.v * o.v,
            self.d * o.v + self.v * o.d,
            self.dd * o.v + 2.0 * self.d * o.d + self.v * o.dd,
        )
    }
}

/// Vector-valued jet.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VecJet {
    pub v: Vec3,
    pub d: Vec3,
    pub dd: Vec3,
}

impl Default for VecJet {
    fn default() -> Self {
        Self::zero()
    }
}

impl VecJet {
    pub fn zero() -> Self {
        Self { v: Vec3::zeros(), d: Vec3::zeros(), dd: Vec3::zeros() }
    }

    pub fn constant(v: Vec3) -> Self {
        Self { v, d: Vec3::zeros(), dd: Vec3::zeros() }
    }

    /// Product with a scalar jet.
    pub fn mul_jet(&self, s: Jet) -> Self {
        Self {
            v: self.v * s.v,
            d: self.d * s.v + self.v * s.d,
            dd: self.dd * s.v + self.d * (2.0 * s.d) + self.v * s.dd,
        }
    }

    pub fn add(&self, o: &VecJet) -> Self {
        Self { v: self.v + o.v, d: self.d + o.d, dd: self.dd + o.dd }
    }
}

/// Periodic wrap of an angle difference into `(-pi, pi]`.
#[inline]
pub fn wrap_angle(d: f64) -> f64 {
    use std::f64::consts::PI;
    let mut x = d % (2.0 * PI);
    if x > PI {
        x -= 2.0 * PI;
    } else if x <= -PI {
        x += 2.0 * PI;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jet_product_and_reciprocal_follow_calculus() {
        // f(x) = x^2 + 1 at x = 2, g = 1/f
        let f = Jet::new(5.0, 4.0, 2.0);
        let g = f.recip();
        assert!((g.v - 0.2).abs() < 1e-15);
        assert!((g.d + 4.0 / 25.0).abs() < 1e-15);
        // g'' = (2 f'^2 - f f'') / f^3 = (32 - 10) / 125
        assert!((g.dd - 22.0 / 125.0).abs() < 1e-15);
        let one = f * g;
        assert!((one.v - 1.0).abs() < 1e-15 && one.d.abs() < 1e-15 && one.dd.abs() < 1e-14);
    }

    #[test]
    fn wrap_angle_range() {
        assert!((wrap_angle(3.5 * std::f64::consts::PI) + 0.5 * std::f64::consts::PI).abs() < 1e-12);
        assert!((wrap_angle(-0.25) + 0.25).abs() < 1e-15);
    }
}
