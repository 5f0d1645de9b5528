use super::operators::{on_surface, OpKind, OperatorSet};
use super::potentials::eval_grad_s;
use crate::error::Result;
use crate::geometry::{estimate_reach, sample_grid_offset, SurfaceGrid};
use crate::quadrature::lagrange_weights;
use crate::vec3::Vec3;

/// One-sided limits of the single-layer gradient versus the jump relations.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct JumpReport {
    pub nodes_checked: usize,
    /// `max |d_n^+ - d_n^- + sigma|`
    pub normal_jump_error: f64,
    /// `max |d_n^- - (sigma/2 + S' sigma)|`
    pub interior_limit_error: f64,
    /// `max |d_n^+ - (-sigma/2 + S' sigma)|`
    pub exterior_limit_error: f64,
    /// `max |grad_tan^+ - grad_tan^-|`
    pub tangential_jump: f64,
    pub interior_normal: Vec<f64>,
    pub exterior_normal: Vec<f64>,
}

/// Offsets along the normal in units of the evaluation-grid spacing.
const OFFSETS: [f64; 9] = [4.0, 4.5, 5.0, 5.5, 6.0, 6.5, 7.0, 7.5, 8.0];
/// Largest offset as a fraction of the reach.
const MAX_DEPTH: f64 = 0.1;

/// Extrapolates the smooth-rule gradient to the surface from both sides at up to `max_nodes` nodes.
///
/// The density is resampled to a grid fine enough that every offset lies
/// within `MAX_DEPTH` of the reach yet at least four spacings away.
pub fn jump_check(grid: &SurfaceGrid, ops: &OperatorSet, sigma: &[f64], max_nodes: usize) -> Result<JumpReport> {
    let spv = on_surface(ops, OpKind::SPrime, sigma)?;
    let h = grid.max_spacing();
    let reach = estimate_reach(grid);
    let top = OFFSETS[OFFSETS.len() - 1];
    let factor = ((top * h) / (MAX_DEPTH * reach)).ceil().max(1.0) as usize;
    let (fine, fine_sigma) = if factor > 1 {
        let fine = sample_grid_offset(&grid.surface, grid.nu * factor, grid.nv * factor, grid.u_offset, grid.v_offset)?;
        let fs = grid.resample(sigma, &fine);
        (fine, fs)
    } else {
        (grid.clone(), sigma.to_vec())
    };
    let hf = fine.max_spacing();
    let ts: Vec<f64> = OFFSETS.iter().map(|o| o * hf).collect();
    let mut val = vec![0.0; ts.len()];
    let mut der = vec![0.0; ts.len()];
    lagrange_weights(&ts, 0.0, &mut val, &mut der);
    let stride = (grid.len() / max_nodes.max(1)).max(1);
    let mut rep = JumpReport::default();
    for k in (0..grid.len()).step_by(stride) {
        let nd = &grid.nodes[k];
        let limit = |sign: f64| -> Vec3 {
            ts.iter()
                .zip(&val)
                .map(|(t, w)| eval_grad_s(&fine, &fine_sigma, &(nd.chart.x + nd.n * (sign * t))) * *w)
                .sum()
        };
        let gp = limit(1.0);
        let gm = limit(-1.0);
        let (np, nm) = (gp.dot(&nd.n), gm.dot(&nd.n));
        let tan = |g: Vec3| g - nd.n * g.dot(&nd.n);
        rep.normal_jump_error = rep.normal_jump_error.max((np - nm + sigma[k]).abs());
        rep.interior_limit_error = rep.interior_limit_error.max((nm - (0.5 * sigma[k] + spv[k])).abs());
        rep.exterior_limit_error = rep.exterior_limit_error.max((np - (-0.5 * sigma[k] + spv[k])).abs());
        rep.tangential_jump = rep.tangential_jump.max((tan(gp) - tan(gm)).norm());
        rep.interior_normal.push(nm);
        rep.exterior_normal.push(np);
        rep.nodes_checked += 1;
    }
    Ok(rep)
}
