use faer::Mat;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Axis, SurfaceGrid};
use crate::linalg::{self, Dense};
use crate::quadrature::singular::{kernel_d, kernel_s, kernel_sp, FineGrid, SingularRow, SingularRule};
use crate::quadrature::SingularParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpKind {
    S,
    D,
    SPrime,
}

/// Dense Nystrom matrices acting on nodal values.
#[derive(Clone, Debug)]
pub struct OperatorSet {
    pub s: Dense,
    pub d: Dense,
    pub sp: Dense,
}

impl OperatorSet {
    pub fn get(&self, op: OpKind) -> &Dense {
        match op {
            OpKind::S => &self.s,
            OpKind::D => &self.d,
            OpKind::SPrime => &self.sp,
        }
    }

    pub fn dim(&self) -> usize {
        self.s.nrows()
    }
}

/// Assembles `S`, `D`, `S'` on one surface.
///
/// Surfaces of revolution reuse one row per ring of the symmetric parameter.
pub fn assemble(grid: &SurfaceGrid, p: &SingularParams) -> Result<OperatorSet> {
    let (nu, nv) = (grid.nu, grid.nv);
    let n = grid.len();
    let rule = SingularRule::new(grid, p)?;
    match grid.surface.rotation_axis_param() {
        Some(Axis::U) => {
            let rows = (0..nv)
                .into_par_iter()
                .map(|j| rule.row(grid.index(0, j)))
                .collect::<Result<Vec<SingularRow>>>()?;
            let pick = |r: &SingularRow, op: OpKind, i: usize, a: usize, b: usize| {
                let src = ((a + nu - i) % nu) * nv + b;
                match op {
                    OpKind::S => r.s[src],
                    OpKind::D => r.d[src],
                    OpKind::SPrime => r.sp[src],
                }
            };
            let build = |op: OpKind| {
                Mat::from_fn(n, n, |t, k| pick(&rows[t % nv], op, t / nv, k / nv, k % nv))
            };
            Ok(OperatorSet { s: build(OpKind::S), d: build(OpKind::D), sp: build(OpKind::SPrime) })
        }
        Some(Axis::V) => {
            let rows = (0..nu)
                .into_par_iter()
                .map(|i| rule.row(grid.index(i, 0)))
                .collect::<Result<Vec<SingularRow>>>()?;
            let pick = |r: &SingularRow, op: OpKind, j: usize, a: usize, b: usize| {
                let src = a * nv + (b + nv - j) % nv;
                match op {
                    OpKind::S => r.s[src],
                    OpKind::D => r.d[src],
                    OpKind::SPrime => r.sp[src],
                }
            };
            let build = |op: OpKind| {
                Mat::from_fn(n, n, |t, k| pick(&rows[t / nv], op, t % nv, k / nv, k % nv))
            };
            Ok(OperatorSet { s: build(OpKind::S), d: build(OpKind::D), sp: build(OpKind::SPrime) })
        }
        None => {
            let rows = (0..n)
                .into_par_iter()
                .map(|t| rule.row(t))
                .collect::<Result<Vec<SingularRow>>>()?;
            Ok(OperatorSet {
                s: Mat::from_fn(n, n, |t, k| rows[t].s[k]),
                d: Mat::from_fn(n, n, |t, k| rows[t].d[k]),
                sp: Mat::from_fn(n, n, |t, k| rows[t].sp[k]),
            })
        }
    }
}

/// Plain smooth-rule blocks mapping densities on `source` to values on `target`.
///
/// `target_sign` multiplies the target normal (for flipped orientations).
pub fn cross_blocks(target: &SurfaceGrid, source: &SurfaceGrid, target_sign: f64, source_sign: f64) -> OperatorSet {
    let (m, n) = (target.len(), source.len());
    let w = source.weights();
    let build = |op: OpKind| {
        Mat::from_fn(m, n, |t, k| {
            let x = target.nodes[t].chart.x;
            let nx = target.nodes[t].n * target_sign;
            let y = source.nodes[k].chart.x;
            let ny = source.nodes[k].n * source_sign;
            w[k] * match op {
                OpKind::S => kernel_s(&x, &y),
                OpKind::D => kernel_d(&x, &y, &ny),
                OpKind::SPrime => kernel_sp(&x, &nx, &y),
            }
        })
    };
    OperatorSet { s: build(OpKind::S), d: build(OpKind::D), sp: build(OpKind::SPrime) }
}

/// Cross blocks for nearby components: the source is refined so the trapezoid
/// error `exp(-2 pi d / h)` stays below `1e-12` at separation `d`.
///
/// Sphere sources fall back to [`cross_blocks`].
pub fn cross_blocks_refined(
    target: &SurfaceGrid,
    source: &SurfaceGrid,
    target_sign: f64,
    source_sign: f64,
) -> OperatorSet {
    if source.surface.is_sphere() {
        return cross_blocks(target, source, target_sign, source_sign);
    }
    let factor = refinement_factor(target, source);
    if factor <= 1 {
        return cross_blocks(target, source, target_sign, source_sign);
    }
    let fine = FineGrid::new(source, factor);
    let (m, n) = (target.len(), source.len());
    let rows: Vec<[Vec<f64>; 3]> = (0..m)
        .into_par_iter()
        .map(|t| {
            let x = target.nodes[t].chart.x;
            let nx = target.nodes[t].n * target_sign;
            let mut c = [Mat::<f64>::zeros(fine.fu, fine.fv), Mat::zeros(fine.fu, fine.fv), Mat::zeros(fine.fu, fine.fv)];
            for a in 0..fine.fu {
                for b in 0..fine.fv {
                    let k = a * fine.fv + b;
                    let (y, ny) = (fine.x[k], fine.n[k] * source_sign);
                    c[0][(a, b)] = fine.w[k] * kernel_s(&x, &y);
                    c[1][(a, b)] = fine.w[k] * kernel_d(&x, &y, &ny);
                    c[2][(a, b)] = fine.w[k] * kernel_sp(&x, &nx, &y);
                }
            }
            c.map(|c| {
                let p = fine.wu.transpose() * &c * &fine.wv;
                let mut row = vec![0.0; n];
                for i in 0..source.nu {
                    for j in 0..source.nv {
                        row[i * source.nv + j] = p[(i, j)];
                    }
                }
                row
            })
        })
        .collect();
    let build = |q: usize| Mat::from_fn(m, n, |t, k| rows[t][q][k]);
    OperatorSet { s: build(0), d: build(1), sp: build(2) }
}

/// Refinement of `source` needed for targets at the observed separation, capped at 8.
pub fn refinement_factor(target: &SurfaceGrid, source: &SurfaceGrid) -> usize {
    let d = target
        .nodes
        .par_iter()
        .map(|t| source.nodes.iter().map(|s| (t.chart.x - s.chart.x).norm()).fold(f64::INFINITY, f64::min))
        .reduce(|| f64::INFINITY, f64::min);
    let (hu, hv) = (2.0 * std::f64::consts::PI / source.nu as f64, 2.0 * std::f64::consts::PI / source.nv as f64);
    let h = source.nodes.iter().map(|s| (s.chart.xu.norm() * hu).max(s.chart.xv.norm() * hv)).fold(0.0, f64::max);
    // 27.6 / (2 pi) = 4.4 gives exp(-2 pi d f / h) < 1e-12
    ((4.4 * h / d).ceil() as usize).clamp(1, 8)
}

/// Applies an assembled operator to a density on the same grid.
pub fn on_surface(ops: &OperatorSet, op: OpKind, sigma: &[f64]) -> Result<Vec<f64>> {
    if sigma.len() != ops.dim() {
        return Err(Error::GridMismatch(format!("density {} vs operator {}", sigma.len(), ops.dim())));
    }
    Ok(linalg::matvec(ops.get(op), sigma))
}

/// Weighted operator norm of `D S - S S'`.
pub fn calderon_residual(ops: &OperatorSet, grid: &SurfaceGrid) -> f64 {
    let diff = &ops.d * &ops.s - &ops.s * &ops.sp;
    let sw: Vec<f64> = grid.weights().iter().map(|w| w.sqrt()).collect();
    let isw: Vec<f64> = sw.iter().map(|w| 1.0 / w).collect();
    linalg::spectral_norm(&linalg::scale_rows_cols(&diff, &sw, &isw), 300)
}

/// Largest `|D S s - S S' s| / |s|` (weighted L2) over the given densities.
pub fn calderon_residual_on(ops: &OperatorSet, grid: &SurfaceGrid, densities: &[Vec<f64>]) -> f64 {
    densities
        .iter()
        .map(|s| {
            let a = linalg::matvec(&ops.d, &linalg::matvec(&ops.s, s));
            let b = linalg::matvec(&ops.s, &linalg::matvec(&ops.sp, s));
            let r: Vec<f64> = a.iter().zip(&b).map(|(p, q)| p - q).collect();
            grid.l2(&r) / grid.l2(s)
        })
        .fold(0.0, f64::max)
}
