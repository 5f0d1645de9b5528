//! Limiting (`lambda -> 0`) magnetostatic problems with prescribed circulations.
//!
//! Circulations are carried by explicit harmonic fields (threading-loop
//! Biot–Savart fields outside, the axis field inside a solid torus); the
//! single layer `grad S[sigma]` has zero circulation on every cycle, so the
//! remaining Neumann problem has standard structure.

pub mod sheet;
pub mod solve;
pub mod sources;

pub use sheet::{sheet_current, TangentField};
pub use solve::{
    axis_field, solve_exterior_limit, solve_interior_limit, BasisField, Circulation, FluxSpec, LimitSolution, Region,
    SolveDiagnostics, SolveOptions,
};
pub use sources::{check_compatibility, IncomingField, Source, SourceRegion};

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::geometry::{sample_grid, ParamSurface};
    use crate::layer_potentials::assemble;
    use crate::quadrature::SingularParams;
    use crate::vec3::vec3;

    #[test]
    fn shielded_sphere_matches_closed_form() {
        let grid = Arc::new(sample_grid(&ParamSurface::Sphere { radius: 1.5 }, 24, 24).unwrap());
        let ops = assemble(&grid, &SingularParams::default()).unwrap();
        let inc = IncomingField::uniform(vec3(0.0, 0.0, 2.0));
        let sol = solve_exterior_limit(grid.clone(), &ops, &inc, &FluxSpec::none(), &SolveOptions::default()).unwrap();
        // D = -B0 R^3 / 2
        let d = sol.dipole_moment();
        assert!((d - vec3(0.0, 0.0, -1.5f64.powi(3))).norm() < 1e-9, "{d:?}");
        let tot = sol.total_trace().unwrap();
        for (nd, b) in grid.nodes.iter().zip(&tot) {
            let st = (nd.chart.x.z / 1.5).acos().sin();
            assert!(b.dot(&nd.n).abs() < 1e-9);
            assert!((b.norm() - 3.0 * st).abs() < 1e-8);
        }
        assert!(sol.diagnostics.bc_residual < 1e-9);
        let far = vec3(0.3, -0.2, 4.0);
        let field = sol.eval_field(&[far]).unwrap()[0];
        let r = far.norm();
        let rh = far / r;
        let dip = (rh * (3.0 * d.dot(&rh)) - d) / r.powi(3);
        assert!((field - dip).norm() < 1e-9);
        assert!(sol.eval_field(&[vec3(0.0, 0.0, 0.5)]).is_err());
    }

    #[test]
    fn torus_exterior_circulation_and_interior_axis_field() {
        let surf = ParamSurface::TorusRev { major: 2.0, minor: 1.0 };
        let grid = Arc::new(sample_grid(&surf, 32, 24).unwrap());
        let ops = assemble(&grid, &SingularParams::default()).unwrap();
        let opts = SolveOptions::default();
        let ext = solve_exterior_limit(grid.clone(), &ops, &IncomingField::none(), &FluxSpec::a(0.7), &opts).unwrap();
        let a = ext.diagnostics.circulations.iter().find(|c| c.cycle == "A").unwrap();
        assert!((a.achieved - 0.7).abs() < 1e-6, "{a:?}");
        assert!(ext.diagnostics.bc_residual < 1e-6, "{:?}", ext.diagnostics);

        let int = solve_interior_limit(grid.clone(), &ops, &IncomingField::none(), &FluxSpec::b(1.0), &opts).unwrap();
        assert!(int.sigma.iter().all(|s| s.abs() < 1e-10));
        let x = vec3(2.1, 0.3, 0.2);
        assert!((int.eval_field(&[x]).unwrap()[0] - axis_field(&x)).norm() < 1e-12);
        assert!(matches!(
            solve_interior_limit(grid, &ops, &IncomingField::none(), &FluxSpec::a(1.0), &opts),
            Err(crate::Error::FluxCount(_))
        ));
    }
}
