//! Laplace layer potentials with kernel `g(x, y) = 1 / (4 pi |x - y|)`.
//!
//! With outward `n` the one-sided normal derivatives of `S[sigma]` are
//! `+sigma/2 + S' sigma` from inside and `-sigma/2 + S' sigma` from outside.

pub mod biot_savart;
pub mod jump;
pub mod operators;
pub mod potentials;

pub use biot_savart::{biot_savart, LoopSource};
pub use jump::{jump_check, JumpReport};
pub use operators::{
    assemble, calderon_residual, calderon_residual_on, cross_blocks, cross_blocks_refined, on_surface, refinement_factor,
    OpKind, OperatorSet,
};
pub use potentials::{eval_grad_s, eval_s, near_surface, SurfaceDensity};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{cycle_integral, sample_grid, Curve, CyclePath, Homology, ParamSurface};
    use crate::quadrature::SingularParams;
    use crate::vec3::{vec3, Vec3};

    #[test]
    fn shell_potentials() {
        // trapezoid error decays like exp(-nv acosh(5/4)) at distance 1
        let g = sample_grid(&ParamSurface::Sphere { radius: 1.0 }, 40, 48).unwrap();
        let one = vec![1.0; g.len()];
        assert!((eval_s(&g, &one, &vec3(0.0, 0.0, 2.0)) - 0.5).abs() < 1e-12);
        assert!((eval_s(&g, &one, &vec3(0.3, 0.0, 0.2)) - 1.0).abs() < 1e-10);
        let gr = eval_grad_s(&g, &one, &vec3(2.0, 0.0, 0.0));
        assert!((gr - vec3(-0.25, 0.0, 0.0)).norm() < 1e-10, "{gr:?}");
    }

    #[test]
    fn loop_on_axis() {
        let lp = LoopSource::new(Curve::circle_z(1.0, 0.0), 1.0, 128);
        let b0 = biot_savart(&lp, &Vec3::zeros()).unwrap();
        assert!((b0 - vec3(0.0, 0.0, 0.5)).norm() < 1e-14);
        let b1 = biot_savart(&lp, &vec3(0.0, 0.0, 1.0)).unwrap();
        assert!((b1.z - 1.0 / (2.0 * 2f64.powf(1.5))).abs() < 1e-14);
        let link = CyclePath {
            curve: Curve::Circle { center: vec3(1.0, 0.0, 0.0), e1: vec3(1.0, 0.0, 0.0), e2: vec3(0.0, 0.0, 1.0), radius: 0.4 },
            label: Homology::A,
            component: 0,
        };
        let c = cycle_integral(|x| biot_savart(&lp, &x), &link, 256).unwrap();
        assert!((c.abs() - 1.0).abs() < 1e-10, "{c}");
        assert!(biot_savart(&lp, &vec3(1.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn sphere_operators_on_constants() {
        let g = sample_grid(&ParamSurface::Sphere { radius: 1.0 }, 16, 16).unwrap();
        let ops = assemble(&g, &SingularParams::default()).unwrap();
        let one = vec![1.0; g.len()];
        let s = on_surface(&ops, OpKind::S, &one).unwrap();
        let d = on_surface(&ops, OpKind::D, &one).unwrap();
        let sp = on_surface(&ops, OpKind::SPrime, &one).unwrap();
        assert!(s.iter().all(|v| (v - 1.0).abs() < 1e-12));
        assert!(d.iter().all(|v| (v + 0.5).abs() < 1e-12));
        assert!(sp.iter().all(|v| (v + 0.5).abs() < 1e-12));
    }

    #[test]
    fn jump_relations_for_uniform_shell() {
        let g = sample_grid(&ParamSurface::Sphere { radius: 1.0 }, 24, 24).unwrap();
        let ops = assemble(&g, &SingularParams::default()).unwrap();
        let one = vec![1.0; g.len()];
        let rep = jump_check(&g, &ops, &one, 16).unwrap();
        assert!(rep.interior_normal.iter().all(|v| v.abs() < 1e-6), "{:?}", rep.interior_normal);
        assert!(rep.exterior_normal.iter().all(|v| (v + 1.0).abs() < 1e-6), "{:?}", rep.exterior_normal);
        assert!(rep.normal_jump_error < 1e-6 && rep.interior_limit_error < 1e-6, "{rep:?}");
    }
}
