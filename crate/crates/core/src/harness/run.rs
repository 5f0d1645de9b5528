use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{ExperimentKind, RunConfig, Side, SourceConfig, SourceSide};
use super::fit::fit_slope;
use super::manifest::{Bound, RunManifest};
use super::output::{write_spectrum, write_sweep, write_trace};
use crate::boundary_layer::{build_beta, collar_norms, pair_with_testform};
use crate::error::{Error, Result};
use crate::geometry::{build_collar_for_lambda, estimate_reach, sample_grid, ParamSurface, SurfaceGrid};
use crate::layer_potentials::{assemble, calderon_residual, jump_check, OperatorSet};
use crate::limit_solver::{
    axis_field, sheet_current, solve_exterior_limit, solve_interior_limit, IncomingField, LimitSolution,
    SolveOptions,
};
use crate::linalg;
use crate::model_problems::disk::{disk_dlambda, DiskSpectrum, TAIL_TOLERANCE};
use crate::model_problems::london::sphere_convergence_study;
use crate::quadrature::SingularParams;
use crate::spectral_checks::{
    b_spectrum_from_sprime, equilibrium_density, g0_constant_check, s_spectrum, sprime_spectrum,
    thinshell_b_spectrum, BoundaryOperators,
};
use crate::vec3::{vec3, Vec3};

/// Tolerance on slopes that the theory states as rates (`~ lambda`), not as exact exponents.
const RATE_TOL: f64 = 0.1;
/// First Bessel zero `k_{1,0}`.
const K10: f64 = 2.404_825_557_695_773;

/// Runs one experiment, writing data files and `manifest.json` into `out`.
///
/// Configuration errors are returned; numerical failures are recorded in the
/// manifest, which is still written.
pub fn run(config: &RunConfig, out: &Path) -> Result<RunManifest> {
    config.validate()?;
    std::fs::create_dir_all(out)?;
    let mut m = RunManifest::new(config.clone(), rayon::current_num_threads());
    let res = match config.kind {
        ExperimentKind::Validate => validate(config, &mut m),
        ExperimentKind::Solve => solve(config, out, &mut m),
        ExperimentKind::Betalayer => betalayer(config, out, &mut m),
        ExperimentKind::Spectra => spectra(config, out, &mut m),
        ExperimentKind::Disk => disk(config, out, &mut m),
        ExperimentKind::Sphere => sphere(config, out, &mut m),
        ExperimentKind::Convergence => convergence(config, out, &mut m),
    };
    match res {
        Err(e @ Error::Config(_)) => return Err(e),
        Err(e) => m.error = Some(e.to_string()),
        Ok(()) => {}
    }
    m.files.push("manifest.json".into());
    m.write(&out.join("manifest.json"))?;
    Ok(m)
}

fn surfaces(c: &RunConfig) -> Result<(ParamSurface, Option<ParamSurface>)> {
    let g = c.geometry.as_ref().ok_or_else(|| Error::Config("missing geometry".into()))?;
    Ok((g.surface()?, g.inner.as_ref().map(|i| i.surface()).transpose()?))
}

fn grid_of(c: &RunConfig, s: &ParamSurface) -> Result<Arc<SurfaceGrid>> {
    Ok(Arc::new(sample_grid(s, c.numeric.nu, c.numeric.nv)?))
}

fn assemble_timed(m: &mut RunManifest, stage: &str, grid: &SurfaceGrid) -> Result<OperatorSet> {
    m.timed(stage, || assemble(grid, &SingularParams::default()))
}

fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |a, b| a.max(b.abs()))
}

fn validate(c: &RunConfig, m: &mut RunManifest) -> Result<()> {
    let tol = &c.numeric.tolerances;
    let (surface, inner) = surfaces(c)?;
    if inner.is_some() {
        return Err(Error::Config("validate runs on a single surface".into()));
    }
    let grid = grid_of(c, &surface)?;
    let ops = assemble_timed(m, "assemble", &grid)?;
    let one = vec![1.0; grid.len()];
    let gauss = max_abs(linalg::matvec(&ops.d, &one).into_iter().map(|v| v + 0.5));
    m.residual("gauss", gauss);
    m.check("gauss", gauss, Bound::Below { limit: tol.identity });
    if let ParamSurface::Sphere { radius } = surface {
        // S[1] = R on a sphere of radius R
        let s1 = max_abs(linalg::matvec(&ops.s, &one).into_iter().map(|v| v - radius));
        m.residual("s_constant", s1);
        m.check("s_constant", s1, Bound::Below { limit: tol.identity });
    }
    let cal = m.timed("calderon", || calderon_residual(&ops, &grid));
    m.residual("calderon", cal);
    m.check("calderon", cal, Bound::Below { limit: tol.calderon });

    // smooth random density from low-order polynomials of the position
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let coef: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
    let sigma: Vec<f64> = grid
        .nodes
        .iter()
        .map(|nd| {
            let x = nd.chart.x;
            coef[0] + coef[1] * x.x + coef[2] * x.y + coef[3] * x.z + coef[4] * x.x * x.y + coef[5] * x.z * x.z
        })
        .collect();
    let jr = m.timed("jump", || jump_check(&grid, &ops, &sigma, 64))?;
    m.residual("jump_normal", jr.normal_jump_error);
    m.residual("jump_interior_limit", jr.interior_limit_error);
    m.residual("jump_exterior_limit", jr.exterior_limit_error);
    m.residual("jump_tangential", jr.tangential_jump);
    Ok(())
}

/// Records boundary-condition and circulation residuals of one solve.
fn record_solve(m: &mut RunManifest, c: &RunConfig, name: &str, sol: &LimitSolution) {
    let tol = &c.numeric.tolerances;
    let d = &sol.diagnostics;
    m.residual(&format!("{name}.solve"), d.solve_residual);
    m.residual(&format!("{name}.boundary_condition"), d.bc_residual);
    m.check(&format!("{name}.boundary_condition"), d.bc_residual, Bound::Below { limit: tol.boundary_condition });
    for circ in &d.circulations {
        let key = format!("{name}.circulation.{}", circ.cycle);
        match circ.target {
            Some(t) => {
                let err = (circ.achieved - t).abs();
                m.residual(&key, err);
                m.check(&key, err, Bound::Below { limit: tol.circulation });
            }
            None => m.residual(&format!("{key}.induced"), circ.achieved),
        }
    }
}

fn incoming_for(c: &RunConfig, side: SourceSide) -> Result<IncomingField> {
    if c.source_side == side {
        c.incoming()
    } else {
        Ok(IncomingField::none())
    }
}

fn relative_l2(grid: &SurfaceGrid, got: &[Vec3], want: &[Vec3]) -> f64 {
    let diff: Vec<Vec3> = got.iter().zip(want).map(|(a, b)| a - b).collect();
    grid.l2_vec(&diff) / grid.l2_vec(want).max(f64::MIN_POSITIVE)
}

fn limit_solve(c: &RunConfig, grid: Arc<SurfaceGrid>, ops: &OperatorSet) -> Result<LimitSolution> {
    let opts = SolveOptions::default();
    match c.flux.region {
        Side::Exterior => solve_exterior_limit(grid, ops, &c.incoming()?, &c.outer_flux(), &opts),
        Side::Interior => solve_interior_limit(grid, ops, &c.incoming()?, &c.inner_flux(), &opts),
    }
}

fn solve(c: &RunConfig, out: &Path, m: &mut RunManifest) -> Result<()> {
    let tol = c.numeric.tolerances.clone();
    let (surface, inner) = surfaces(c)?;
    let grid = grid_of(c, &surface)?;
    let ops = assemble_timed(m, "assemble", &grid)?;
    let Some(inner) = inner else {
        let sol = m.timed("solve", || limit_solve(c, grid.clone(), &ops))?;
        record_solve(m, c, "surface", &sol);
        let total = sol.total_trace()?;
        write_trace(&out.join("trace.csv"), &grid, &total, &sheet_current(&sol)?.values)?;
        m.files.push("trace.csv".into());
        // a sphere in a uniform field has total trace (3/2) B_tan
        let uniform: Option<Vec3> = c.sources.iter().try_fold(Vec3::zeros(), |acc, s| match s {
            SourceConfig::Uniform { b } => Some(acc + vec3(b[0], b[1], b[2])),
            _ => None,
        });
        if let (true, Some(b0), Side::Exterior, SourceSide::Outer) =
            (surface.is_sphere(), uniform, c.flux.region, c.source_side)
        {
            let want: Vec<Vec3> = grid.nodes.iter().map(|nd| (b0 - nd.n * b0.dot(&nd.n)) * 1.5).collect();
            let err = relative_l2(&grid, &total, &want);
            m.residual("sphere_closed_form", err);
            m.check("sphere_closed_form", err, Bound::Below { limit: tol.trace });
        }
        return Ok(());
    };
    let igrid = grid_of(c, &inner)?;
    let iops = assemble_timed(m, "assemble_inner", &igrid)?;
    let opts = SolveOptions::default();
    let ext = m.timed("solve_outer", || {
        solve_exterior_limit(grid.clone(), &ops, &incoming_for(c, SourceSide::Outer)?, &c.outer_flux(), &opts)
    })?;
    let int = m.timed("solve_inner", || {
        solve_interior_limit(igrid.clone(), &iops, &incoming_for(c, SourceSide::Inner)?, &c.inner_flux(), &opts)
    })?;
    record_solve(m, c, "outer", &ext);
    record_solve(m, c, "inner", &int);
    let (to, ti) = (ext.total_trace()?, int.total_trace()?);
    write_trace(&out.join("trace.csv"), &grid, &to, &sheet_current(&ext)?.values)?;
    write_trace(&out.join("trace_inner.csv"), &igrid, &ti, &sheet_current(&int)?.values)?;
    m.files.extend(["trace.csv".into(), "trace_inner.csv".into()]);
    // without sources and with a = 0 the hole carries b times the azimuthal field and the outside is empty
    if c.sources.is_empty() && c.flux.a.iter().all(|a| *a == 0.0) && inner.genus() == 1 {
        let b = c.flux.b[0];
        let want: Vec<Vec3> = igrid.nodes.iter().map(|nd| axis_field(&nd.chart.x) * b).collect();
        let err = relative_l2(&igrid, &ti, &want);
        m.residual("inner_axis_field", err);
        m.check("inner_axis_field", err, Bound::Below { limit: tol.trace });
        let outer_norm = grid.l2_vec(&to);
        m.residual("outer_norm", outer_norm);
        m.check("outer_norm", outer_norm, Bound::Below { limit: tol.outer_norm });
    }
    Ok(())
}

/// Surface, limiting solve, sheet current and collar half-width shared by the sweeps.
fn sweep_setup(c: &RunConfig, m: &mut RunManifest) -> Result<(Arc<SurfaceGrid>, crate::limit_solver::TangentField, f64, f64)> {
    let (surface, _) = surfaces(c)?;
    let grid = grid_of(c, &surface)?;
    let ops = assemble_timed(m, "assemble", &grid)?;
    let sol = m.timed("solve", || limit_solve(c, grid.clone(), &ops))?;
    record_solve(m, c, "surface", &sol);
    let gamma = sheet_current(&sol)?;
    let reach = estimate_reach(&grid);
    let r0 = c.numeric.r0.unwrap_or(0.25 * reach);
    m.residual("reach", reach);
    m.residual("r0", r0);
    Ok((grid, gamma, reach, r0))
}

fn sorted_lambdas(c: &RunConfig) -> Vec<f64> {
    let mut l = c.numeric.lambdas.clone();
    l.sort_by(|a, b| b.total_cmp(a));
    l
}

fn betalayer(c: &RunConfig, out: &Path, m: &mut RunManifest) -> Result<()> {
    let tol = c.numeric.tolerances.clone();
    let (grid, gamma, reach, r0) = sweep_setup(c, m)?;
    let mut rows = Vec::new();
    let (mut l2, mut l1, mut res) = (Vec::new(), Vec::new(), Vec::new());
    let (mut closed, mut trace) = (0.0f64, 0.0f64);
    for lam in sorted_lambdas(c) {
        let n = m.timed(&format!("beta {lam:e}"), || -> Result<_> {
            let collar = build_collar_for_lambda(grid.clone(), r0, lam, reach)?;
            Ok(collar_norms(&build_beta(collar, &gamma, lam)?))
        })?;
        for (name, v) in [
            ("l2", n.l2),
            ("l1", n.l1),
            ("residual_l2", n.residual_l2),
            ("closedness", n.closedness),
            ("sheet_error", n.sheet_error),
            ("trace_error", n.trace_error),
        ] {
            rows.push((lam, name.to_string(), v));
        }
        l2.push((lam, n.l2));
        l1.push((lam, n.l1));
        res.push((lam, n.residual_l2));
        closed = closed.max(n.closedness);
        trace = trace.max(n.trace_error);
    }
    write_sweep(&out.join("sweep.csv"), &rows)?;
    m.files.push("sweep.csv".into());
    m.check_slope("l2", fit_slope(&l2)?, 0.5, tol.slope);
    m.check_slope("l1", fit_slope(&l1)?, 1.0, tol.slope);
    m.check_slope("residual_l2", fit_slope(&res)?, -0.5, tol.slope);
    m.check("closedness", closed, Bound::Below { limit: tol.closedness });
    m.check("trace_identity", trace, Bound::Below { limit: tol.trace });
    Ok(())
}

fn convergence(c: &RunConfig, out: &Path, m: &mut RunManifest) -> Result<()> {
    let (grid, gamma, reach, r0) = sweep_setup(c, m)?;
    let mut rows = Vec::new();
    let (mut sheet, mut pair) = (Vec::new(), Vec::new());
    let mut consistency = 0.0f64;
    // Psi = i_P dV with P = (-y, x, 0), curl P = (0, 0, 2)
    let p = |x: Vec3| vec3(-x.y, x.x, 0.0);
    let curl_p = |_: Vec3| vec3(0.0, 0.0, 2.0);
    for lam in sorted_lambdas(c) {
        let (n, pr) = m.timed(&format!("beta {lam:e}"), || -> Result<_> {
            let collar = build_collar_for_lambda(grid.clone(), r0, lam, reach)?;
            let beta = build_beta(collar, &gamma, lam)?;
            Ok((collar_norms(&beta), pair_with_testform(&beta, p, curl_p)))
        })?;
        let rel = (pr.difference() / pr.boundary).abs();
        rows.push((lam, "sheet_error".to_string(), n.sheet_error));
        rows.push((lam, "pairing_current".to_string(), pr.current));
        rows.push((lam, "pairing_boundary".to_string(), pr.boundary));
        rows.push((lam, "pairing_relative_difference".to_string(), rel));
        rows.push((lam, "pairing_consistency".to_string(), pr.consistency()));
        sheet.push((lam, n.sheet_error));
        pair.push((lam, rel));
        consistency = consistency.max(pr.consistency());
    }
    write_sweep(&out.join("sweep.csv"), &rows)?;
    m.files.push("sweep.csv".into());
    m.check_slope("sheet_error", fit_slope(&sheet)?, 1.0, RATE_TOL);
    let f = fit_slope(&pair)?;
    m.fits.insert("pairing".into(), f);
    m.check("pairing_slope", f.slope, Bound::AtLeast { limit: 0.9 });
    m.check("pairing_r2", f.r2, Bound::Above { limit: 0.98 });
    m.residual("pairing_consistency", consistency);
    Ok(())
}

/// Points at depth `t * reach` below random surface nodes, `t in (0.2, 0.8)`.
fn interior_probes(grid: &SurfaceGrid, count: usize, seed: u64) -> Vec<Vec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reach = estimate_reach(grid);
    (0..count)
        .map(|_| {
            let nd = &grid.nodes[rng.random_range(0..grid.len())];
            nd.chart.x - nd.n * (reach * rng.random_range(0.2..0.8))
        })
        .collect()
}

fn spectra(c: &RunConfig, out: &Path, m: &mut RunManifest) -> Result<()> {
    let tol = c.numeric.tolerances.clone();
    let (surface, inner) = surfaces(c)?;
    let grid = grid_of(c, &surface)?;
    if let Some(inner) = inner {
        let igrid = grid_of(c, &inner)?;
        let b = m.timed("assemble", || BoundaryOperators::shell(&grid, &igrid, &SingularParams::default()))?;
        let rep = m.timed("eigen", || sprime_spectrum(&b, false))?;
        write_spectrum(&out.join("spectrum.csv"), &rep.eigenvalues)?;
        m.residual("calderon_resolved", rep.calderon);
        m.residual("sprime_min_plus_half", rep.min() + 0.5);
        m.residual("sprime_max_minus_half", rep.max() - 0.5);
        m.check_flag("sprime_contains_both_halves_simple", rep.shell_contained());
        let sh = thinshell_b_spectrum(&rep)?;
        write_spectrum(&out.join("b_spectrum.csv"), &sh.values)?;
        m.files.extend(["spectrum.csv".into(), "b_spectrum.csv".into()]);
        m.check_flag("b_in_closed_interval", sh.contained);
        m.check_flag("b_minus_one_simple", sh.minus_one_simple);
        m.residual("b_cluster_fraction", sh.cluster_fraction);
        m.check("b_interior_median", sh.interior_median, Bound::Within { target: -0.5, tol: 0.05 });
        return Ok(());
    }
    let ops = assemble_timed(m, "assemble", &grid)?;
    let b = BoundaryOperators::single(&grid, ops.clone());
    let rep = m.timed("eigen", || sprime_spectrum(&b, false))?;
    write_spectrum(&out.join("spectrum.csv"), &rep.eigenvalues)?;
    m.residual("calderon_resolved", rep.calderon);
    m.residual("sprime_min_plus_half", rep.min() + 0.5);
    m.residual("sprime_max", rep.max());
    m.residual("bottom_gap", rep.bottom_gap);
    m.check_flag("sprime_contained_bottom_simple", rep.single_surface_contained());
    let bs = b_spectrum_from_sprime(&rep)?;
    write_spectrum(&out.join("b_spectrum.csv"), &bs.values)?;
    m.files.extend(["spectrum.csv".into(), "b_spectrum.csv".into()]);
    m.residual("b_margin", bs.m);
    m.check_flag("b_in_half_open_interval", bs.contained);
    let g0 = equilibrium_density(&grid, &ops)?;
    let probes = interior_probes(&grid, c.numeric.probes.max(1), c.seed);
    m.residual("g0_potential_spread", g0_constant_check(&grid, &g0, &probes)?);
    if let ParamSurface::Sphere { radius } = surface {
        let s = s_spectrum(&b)?;
        let (mut e_sp, mut e_s, mut k) = (0.0f64, 0.0f64, 0usize);
        for n in 0..=c.numeric.max_degree {
            let mult = 2 * n + 1;
            if k + mult > rep.eigenvalues.len() {
                return Err(Error::Config(format!("degree {n} exceeds the resolved band")));
            }
            for _ in 0..mult {
                e_sp = e_sp.max((rep.eigenvalues[k] + 1.0 / (2.0 * mult as f64)).abs());
                e_s = e_s.max((s[s.len() - 1 - k] - radius / mult as f64).abs());
                k += 1;
            }
        }
        m.residual("sphere_sprime_harmonics", e_sp);
        m.residual("sphere_s_harmonics", e_s);
        m.check("sphere_sprime_harmonics", e_sp, Bound::Below { limit: tol.spectrum });
        m.check("sphere_s_harmonics", e_s, Bound::Below { limit: tol.spectrum });
    }
    Ok(())
}

fn disk(c: &RunConfig, out: &Path, m: &mut RunManifest) -> Result<()> {
    let n = &c.numeric;
    let spec = m.timed("coefficients", || DiskSpectrum::exp_x(n.disk_orders, n.disk_zeros))?;
    let k10 = (spec.zeros[0][0] - K10).abs();
    m.residual("k10", k10);
    m.check("k10", k10, Bound::Below { limit: 1e-10 });
    m.residual("envelope_last_order", spec.envelope[spec.max_order]);
    let mut rows = Vec::new();
    let mut d2 = Vec::new();
    let mut worst_tail = 0.0f64;
    let lambdas = sorted_lambdas(c);
    let mut prev = f64::INFINITY;
    let mut monotone = true;
    for &lam in &lambdas {
        let d = disk_dlambda(&spec, lam)?;
        rows.push((lam, "D".to_string(), d.d));
        rows.push((lam, "D2".to_string(), d.d * d.d));
        rows.push((lam, "envelope_bound".to_string(), d.envelope_bound));
        rows.push((lam, "tail_uncertainty".to_string(), d.tail_uncertainty));
        d2.push((lam, d.d * d.d));
        worst_tail = worst_tail.max(d.tail_uncertainty / (d.d * d.d));
        // lambdas descend, so D must not increase
        monotone &= d.d <= prev;
        prev = d.d;
    }
    write_sweep(&out.join("sweep.csv"), &rows)?;
    m.files.push("sweep.csv".into());
    m.check_slope("d_squared", fit_slope(&d2)?, 1.0, RATE_TOL);
    m.check("tail_relative_uncertainty", worst_tail, Bound::Below { limit: TAIL_TOLERANCE });
    m.check_flag("monotone_in_lambda", monotone);
    Ok(())
}

fn sphere(c: &RunConfig, out: &Path, m: &mut RunManifest) -> Result<()> {
    let tol = c.numeric.tolerances.clone();
    let radius = c.geometry.as_ref().and_then(|g| g.radius).unwrap_or(1.0);
    let b0 = match c.sources.as_slice() {
        [SourceConfig::Uniform { b }] => b[2],
        _ => return Err(Error::Config("sphere study needs one uniform source".into())),
    };
    let lambdas = sorted_lambdas(c);
    let study = m.timed("study", || sphere_convergence_study(radius, b0, &lambdas, c.numeric.nu))?;
    let mut rows = Vec::new();
    for r in &study.rows {
        rows.push((r.lambda, "normal_l2".to_string(), r.normal_l2));
        rows.push((r.lambda, "tangential_l2".to_string(), r.tangential_l2));
        rows.push((r.lambda, "collar_l2".to_string(), r.collar_l2));
        rows.push((r.lambda, "dipole".to_string(), r.dipole));
    }
    write_sweep(&out.join("sweep.csv"), &rows)?;
    m.files.push("sweep.csv".into());
    let need = |f: Option<crate::harness::SlopeFit>| f.ok_or_else(|| Error::SlopeData("fit failed".into()));
    m.check_slope("normal_trace", need(study.normal_fit)?, 1.0, RATE_TOL);
    if let Some(f) = study.tangential_fit {
        m.fits.insert("tangential_trace".into(), f);
    }
    let cf = need(study.collar_fit)?;
    m.fits.insert("collar".into(), cf);
    m.check("collar_slope", cf.slope, Bound::AtLeast { limit: 0.4 });
    let k = study.rows.len();
    m.check_flag("normal_trace_decreases_last_step", study.rows[k - 1].normal_l2 < study.rows[k - 2].normal_l2);
    let dd = (study.extrapolated_dipole - study.limit_dipole).abs();
    m.residual("limit_dipole", study.limit_dipole);
    m.residual("extrapolated_dipole", study.extrapolated_dipole);
    m.check("dipole_extrapolation", dd, Bound::Below { limit: tol.dipole });
    Ok(())
}
