use std::f64::consts::PI;
use std::sync::Arc;

use faer::Mat;

use super::sources::{check_compatibility, IncomingField};
use crate::error::{Error, Result};
use crate::geometry::{cycle_integral, estimate_reach, torus_cycles, Curve, CyclePath, Homology, SurfaceGrid};
use crate::layer_potentials::{biot_savart, eval_grad_s, LoopSource, OpKind, OperatorSet};
use crate::linalg;
use crate::vec3::Vec3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    /// Unbounded component outside the surface.
    Exterior,
    /// Bounded component inside the surface.
    Interior,
}

/// Prescribed circulations: one `a` per A-cycle (exterior), one `b` per B-cycle (interior).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FluxSpec {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl FluxSpec {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn a(a: f64) -> Self {
        Self { a: vec![a], b: Vec::new() }
    }

    pub fn b(b: f64) -> Self {
        Self { a: Vec::new(), b: vec![b] }
    }
}

/// Harmonic field carrying the circulation of a solution.
#[derive(Clone, Debug, PartialEq)]
pub enum BasisField {
    /// Unit-current threading loop.
    Loop(LoopSource),
    /// `(-y, x, 0) / (2 pi (x^2 + y^2))`
    Axis,
}

impl BasisField {
    pub fn eval(&self, x: &Vec3) -> Result<Vec3> {
        match self {
            BasisField::Loop(lp) => biot_savart(lp, x),
            BasisField::Axis => Ok(axis_field(x)),
        }
    }
}

pub fn axis_field(x: &Vec3) -> Vec3 {
    Vec3::new(-x.y, x.x, 0.0) / (2.0 * PI * (x.x * x.x + x.y * x.y))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOptions {
    pub loop_samples: usize,
    pub cycle_samples: usize,
    /// Displacement of the A-cycle (outward); default half the reach.
    pub eps_a: Option<f64>,
    /// Displacement of the B-cycle; default `+eps_a` outside, `-reach/2` inside.
    pub eps_b: Option<f64>,
    pub threading: Option<Curve>,
    pub compat_tol: f64,
    pub circulation_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            loop_samples: 512,
            cycle_samples: 1024,
            eps_a: None,
            eps_b: None,
            threading: None,
            compat_tol: 1e-8,
            circulation_tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Circulation {
    pub cycle: String,
    pub target: Option<f64>,
    pub achieved: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolveDiagnostics {
    /// Relative residual of the dense solve.
    pub solve_residual: f64,
    /// `max |(B + B^In) . n| / max |B^In|` on the nodes (absolute when `B^In = 0`).
    pub bc_residual: f64,
    pub compatibility: f64,
    pub circulations: Vec<Circulation>,
}

/// Limiting field on one side of one boundary component.
#[derive(Clone, Debug)]
pub struct LimitSolution {
    pub grid: Arc<SurfaceGrid>,
    pub region: Region,
    pub sigma: Vec<f64>,
    /// `S[sigma]` and `S'[sigma]` on the nodes.
    pub s_sigma: Vec<f64>,
    pub sp_sigma: Vec<f64>,
    pub basis: Vec<(f64, BasisField)>,
    pub incoming: IncomingField,
    pub cycles: Vec<CyclePath>,
    pub diagnostics: SolveDiagnostics,
}

/// Unit-current loop through the hole, oriented to circulate `+1` around the A-cycle.
fn threading_loop(grid: &SurfaceGrid, cycle: &CyclePath, opts: &SolveOptions) -> Result<LoopSource> {
    let curve = opts.threading.clone().unwrap_or(Curve::Centerline { surface: grid.surface.clone() });
    let lp = LoopSource::new(curve, 1.0, opts.loop_samples);
    let c = cycle_integral(|x| biot_savart(&lp, &x), cycle, opts.cycle_samples)?;
    if (c.abs() - 1.0).abs() > opts.circulation_tol {
        return Err(Error::CirculationMismatch { cycle: "A (threading loop)".into(), expected: 1.0, got: c });
    }
    Ok(if c < 0.0 { lp.reversed() } else { lp })
}

fn bc_scale(b_in: &[Vec3]) -> f64 {
    let m = b_in.iter().map(|b| b.norm()).fold(0.0, f64::max);
    if m > 0.0 {
        m
    } else {
        1.0
    }
}

/// Exterior limit `B = grad S[sigma] + sum a_j h_j` with `B . n = -B^In . n`.
pub fn solve_exterior_limit(
    grid: Arc<SurfaceGrid>,
    ops: &OperatorSet,
    incoming: &IncomingField,
    flux: &FluxSpec,
    opts: &SolveOptions,
) -> Result<LimitSolution> {
    let genus = grid.surface.genus();
    if flux.a.len() != genus || !flux.b.is_empty() {
        return Err(Error::FluxCount(format!(
            "{} a-values and {} b-values for genus {genus} exterior",
            flux.a.len(),
            flux.b.len()
        )));
    }
    let reach = estimate_reach(&grid);
    let eps_a = opts.eps_a.unwrap_or(0.5 * reach);
    let eps_b = opts.eps_b.unwrap_or(eps_a);
    let cycles = torus_cycles(&grid.surface, 0, eps_a, eps_b);
    let mut basis = Vec::new();
    if genus == 1 {
        let lp = threading_loop(&grid, &cycles[0], opts)?;
        basis.push((flux.a[0], BasisField::Loop(lp)));
    }
    let b_in = incoming.on_grid(&grid)?;
    let n = grid.len();
    let mut rhs = vec![0.0; n];
    for (k, nd) in grid.nodes.iter().enumerate() {
        let mut b = b_in[k];
        for (c, h) in &basis {
            b += h.eval(&nd.chart.x)? * *c;
        }
        rhs[k] = -b.dot(&nd.n);
    }
    let a = Mat::from_fn(n, n, |i, j| ops.sp[(i, j)] - if i == j { 0.5 } else { 0.0 });
    let sigma = linalg::solve(&a, &rhs)?;
    let solve_residual = linalg::residual(&a, &sigma, &rhs);
    finish(grid, ops, Region::Exterior, sigma, basis, incoming.clone(), cycles, flux, opts, &b_in, solve_residual)
}

/// Interior limit in a solid torus: `B = grad S[sigma] + b h_axis`, `B . n = -B^In . n`.
pub fn solve_interior_limit(
    grid: Arc<SurfaceGrid>,
    ops: &OperatorSet,
    incoming: &IncomingField,
    flux: &FluxSpec,
    opts: &SolveOptions,
) -> Result<LimitSolution> {
    let genus = grid.surface.genus();
    if flux.b.len() != genus || !flux.a.is_empty() {
        return Err(Error::FluxCount(format!(
            "{} b-values and {} a-values for genus {genus} interior",
            flux.b.len(),
            flux.a.len()
        )));
    }
    let compat = check_compatibility(&grid, incoming)?;
    if compat.abs() > opts.compat_tol * grid.area {
        return Err(Error::Compatibility { residual: compat });
    }
    if genus == 1 && grid.nodes.iter().any(|n| n.chart.x.x.hypot(n.chart.x.y) < 1e-3) {
        return Err(Error::WrongRegion("solid torus meets the z-axis".into()));
    }
    let reach = estimate_reach(&grid);
    let eps_a = opts.eps_a.unwrap_or(0.5 * reach);
    let eps_b = opts.eps_b.unwrap_or(-0.5 * reach);
    let cycles = torus_cycles(&grid.surface, 0, eps_a, eps_b);
    let basis: Vec<(f64, BasisField)> = if genus == 1 { vec![(flux.b[0], BasisField::Axis)] } else { Vec::new() };

    let b_in = incoming.on_grid(&grid)?;
    let n = grid.len();
    let mut rhs = vec![0.0; n];
    for (k, nd) in grid.nodes.iter().enumerate() {
        let mut b = b_in[k];
        for (c, h) in &basis {
            b += h.eval(&nd.chart.x)? * *c;
        }
        rhs[k] = -b.dot(&nd.n);
    }
    let mean = grid.mean(&rhs);
    rhs.iter_mut().for_each(|r| *r -= mean);
    let w = grid.weights();
    let area = grid.area;
    let a = Mat::from_fn(n, n, |i, j| ops.sp[(i, j)] + if i == j { 0.5 } else { 0.0 } + w[j] / area);
    let sigma = linalg::solve(&a, &rhs)?;
    let solve_residual = linalg::residual(&a, &sigma, &rhs);
    let total: f64 = sigma.iter().zip(w).map(|(s, w)| s * w).sum();
    let scale = sigma.iter().zip(w).map(|(s, w)| (s * w).abs()).sum::<f64>().max(1e-300);
    if total.abs() > 1e-8 * scale.max(1.0) {
        return Err(Error::SolveFailed(format!("deflation residual {total:.3e}")));
    }
    finish(grid, ops, Region::Interior, sigma, basis, incoming.clone(), cycles, flux, opts, &b_in, solve_residual)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    grid: Arc<SurfaceGrid>,
    ops: &OperatorSet,
    region: Region,
    sigma: Vec<f64>,
    basis: Vec<(f64, BasisField)>,
    incoming: IncomingField,
    cycles: Vec<CyclePath>,
    flux: &FluxSpec,
    opts: &SolveOptions,
    b_in: &[Vec3],
    solve_residual: f64,
) -> Result<LimitSolution> {
    let s_sigma = linalg::matvec(ops.get(OpKind::S), &sigma);
    let sp_sigma = linalg::matvec(ops.get(OpKind::SPrime), &sigma);
    let mut sol = LimitSolution {
        grid,
        region,
        sigma,
        s_sigma,
        sp_sigma,
        basis,
        incoming,
        cycles,
        diagnostics: SolveDiagnostics { solve_residual, ..Default::default() },
    };
    let trace = sol.trace()?;
    let scale = bc_scale(b_in);
    sol.diagnostics.bc_residual = sol
        .grid
        .nodes
        .iter()
        .zip(trace.iter().zip(b_in))
        .map(|(nd, (b, bi))| (b + bi).dot(&nd.n).abs())
        .fold(0.0, f64::max)
        / scale;
    for cyc in sol.cycles.clone() {
        let (name, target) = match (cyc.label, region) {
            (Homology::A, Region::Exterior) => ("A", flux.a.first().copied()),
            (Homology::B, Region::Interior) => ("B", flux.b.first().copied()),
            (Homology::B, Region::Exterior) => ("B", None),
            // displaced outward, so not inside the solid torus
            (Homology::A, Region::Interior) => continue,
        };
        let achieved = cycle_integral(|x| sol.field_unchecked(&x), &cyc, opts.cycle_samples)?;
        if let Some(t) = target {
            if (achieved - t).abs() > opts.circulation_tol {
                return Err(Error::CirculationMismatch { cycle: name.into(), expected: t, got: achieved });
            }
        }
        sol.diagnostics.circulations.push(Circulation { cycle: name.into(), target, achieved });
    }
    Ok(sol)
}

impl LimitSolution {
    /// Solved field at `x` without the region check.
    pub fn field_unchecked(&self, x: &Vec3) -> Result<Vec3> {
        let mut b = eval_grad_s(&self.grid, &self.sigma, x);
        for (c, h) in &self.basis {
            if *c != 0.0 {
                b += h.eval(x)? * *c;
            }
        }
        Ok(b)
    }

    /// Smooth-rule solid-angle indicator: about `-1` inside, `0` outside.
    pub fn gauss_indicator(&self, x: &Vec3) -> f64 {
        let w = self.grid.weights();
        self.grid
            .nodes
            .iter()
            .enumerate()
            .map(|(k, n)| {
                let r = x - n.chart.x;
                let d = r.norm();
                w[k] * n.n.dot(&r) / (d * d * d)
            })
            .sum::<f64>()
            / (4.0 * PI)
    }

    pub fn in_region(&self, x: &Vec3) -> bool {
        let g = self.gauss_indicator(x);
        match self.region {
            Region::Exterior => g > -0.5,
            Region::Interior => g < -0.5,
        }
    }

    /// Solved (scattered) field at points of the solution's region.
    pub fn eval_field(&self, points: &[Vec3]) -> Result<Vec<Vec3>> {
        points
            .iter()
            .map(|x| {
                if !self.in_region(x) {
                    return Err(Error::WrongRegion(format!("({:.4}, {:.4}, {:.4})", x.x, x.y, x.z)));
                }
                self.field_unchecked(x)
            })
            .collect()
    }

    /// One-sided boundary trace of the solved field on the nodes.
    pub fn trace(&self) -> Result<Vec<Vec3>> {
        let side = match self.region {
            Region::Exterior => -0.5,
            Region::Interior => 0.5,
        };
        let tan = self.grid.surface_gradient(&self.s_sigma);
        self.grid
            .nodes
            .iter()
            .enumerate()
            .map(|(k, nd)| {
                let mut b = tan[k] + nd.n * (side * self.sigma[k] + self.sp_sigma[k]);
                for (c, h) in &self.basis {
                    if *c != 0.0 {
                        b += h.eval(&nd.chart.x)? * *c;
                    }
                }
                Ok(b)
            })
            .collect()
    }

    /// Trace of the solved plus incoming field.
    pub fn total_trace(&self) -> Result<Vec<Vec3>> {
        let t = self.trace()?;
        let b_in = self.incoming.on_grid(&self.grid)?;
        Ok(t.iter().zip(&b_in).map(|(a, b)| a + b).collect())
    }

    /// Far-field dipole `D` in `B ~ (3 (D . r^) r^ - D) / r^3` of the layer part.
    pub fn dipole_moment(&self) -> Vec3 {
        let w = self.grid.weights();
        let p: Vec3 = self.grid.nodes.iter().enumerate().map(|(k, n)| n.chart.x * (w[k] * self.sigma[k])).sum();
        -p / (4.0 * PI)
    }

    /// Total single-layer charge `int sigma dS`.
    pub fn charge(&self) -> f64 {
        self.grid.weights().iter().zip(&self.sigma).map(|(w, s)| w * s).sum()
    }
}
