use super::beta::{BetaField, Slice};
use crate::vec3::Vec3;

/// Collar integrals of one `beta_lambda`.
#[derive(Clone, Debug, PartialEq)]
pub struct CollarNorms {
    pub lambda: f64,
    pub l2: f64,
    pub l1: f64,
    pub residual_l2: f64,
    /// `max |div B| / max |grad B|` over the collar.
    pub closedness: f64,
    /// Relative L2 error of `int j drho` against `-gamma0` on the surface.
    pub sheet_error: f64,
    pub trace_error: f64,
}

/// Per-slice partial sums; reduced sequentially in slice order.
#[derive(Clone, Copy, Default)]
struct Partial {
    l2: f64,
    l1: f64,
    res: f64,
    div: f64,
    grad: f64,
}

fn slice_partial(beta: &BetaField, m: usize, s: &Slice) -> Partial {
    let mut p = Partial::default();
    for k in 0..s.b.len() {
        let w = beta.collar.weight(k, m);
        p.l2 += w * s.b[k].norm_squared();
        p.l1 += w * s.b[k].norm();
        if !s.residual.is_empty() {
            p.res += w * s.residual[k].norm_squared();
        }
        p.div = p.div.max(s.div[k].abs());
    }
    p.grad = s.grad_scale;
    p
}

pub fn collar_norms(beta: &BetaField) -> CollarNorms {
    let slices = beta.slices(true);
    let grid = &beta.collar.grid;
    let mut tot = Partial::default();
    let mut sheet = vec![Vec3::zeros(); grid.len()];
    for (m, s) in slices.iter().enumerate() {
        let Some(s) = s else { continue };
        let p = slice_partial(beta, m, s);
        tot.l2 += p.l2;
        tot.l1 += p.l1;
        tot.res += p.res;
        tot.div = tot.div.max(p.div);
        tot.grad = tot.grad.max(p.grad);
        let wr = beta.collar.rho.weights[m];
        for (acc, j) in sheet.iter_mut().zip(&s.j) {
            *acc += j * wr;
        }
    }
    let diff: Vec<Vec3> = sheet.iter().zip(&beta.gamma).map(|(a, g)| a + g).collect();
    let den = grid.l2_vec(&beta.gamma);
    CollarNorms {
        lambda: beta.lambda,
        l2: tot.l2.sqrt(),
        l1: tot.l1,
        residual_l2: tot.res.sqrt(),
        closedness: if tot.grad > 0.0 { tot.div / tot.grad } else { tot.div },
        sheet_error: if den > 0.0 { grid.l2_vec(&diff) / den } else { grid.l2_vec(&diff) },
        trace_error: beta.trace_error,
    }
}

/// Collar L2 norm of `B - exact(x)`.
pub fn collar_l2_difference(beta: &BetaField, exact: impl Fn(Vec3) -> Vec3 + Sync) -> f64 {
    let slices = beta.slices(false);
    let mut acc = 0.0;
    for (m, s) in slices.iter().enumerate() {
        let rho = beta.collar.rho.nodes[m];
        for k in 0..beta.collar.grid.len() {
            let x = beta.collar.position(k, rho);
            let b = s.as_ref().map_or(Vec3::zeros(), |s| s.b[k]);
            acc += beta.collar.weight(k, m) * (b - exact(x)).norm_squared();
        }
    }
    acc.sqrt()
}

/// A point of the collar addressed by surface node and depth.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollarPoint {
    pub node: usize,
    pub rho: f64,
}

/// `j = curl beta` at collar points; points outside `[-2 r0, 0]` get zero and `false`.
pub fn eval_current(beta: &BetaField, points: &[CollarPoint]) -> Vec<(Vec3, bool)> {
    let mut out = vec![(Vec3::zeros(), false); points.len()];
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].rho.total_cmp(&points[b].rho));
    let mut cached: Option<Slice> = None;
    for i in order {
        let p = points[i];
        let inside = p.rho <= 0.0 && p.rho >= -2.0 * beta.collar.r0 && p.node < beta.collar.grid.len();
        if !inside {
            continue;
        }
        if beta.negligible(p.rho) {
            out[i] = (Vec3::zeros(), true);
            continue;
        }
        if cached.as_ref().is_none_or(|s| s.rho != p.rho) {
            cached = Some(beta.slice(p.rho, false));
        }
        out[i] = (cached.as_ref().expect("slice cached").j[p.node], true);
    }
    out
}

/// Terms of `int_collar j . P dV = int_surface (B x P) . n dS + int_collar B . curl P dV`
/// for the test 2-form `Psi = i_P dV`; `beta` vanishes at the deep end of the collar.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pairing {
    pub current: f64,
    pub boundary: f64,
    pub remainder: f64,
}

impl Pairing {
    /// Deviation from the current-sheet limit; equals `remainder` up to discretization.
    pub fn difference(&self) -> f64 {
        self.current - self.boundary
    }

    /// Integration-by-parts defect, relative to the boundary term.
    pub fn consistency(&self) -> f64 {
        (self.current - self.boundary - self.remainder).abs() / self.boundary.abs().max(f64::MIN_POSITIVE)
    }
}

pub fn pair_with_testform(
    beta: &BetaField,
    p: impl Fn(Vec3) -> Vec3 + Sync,
    curl_p: impl Fn(Vec3) -> Vec3 + Sync,
) -> Pairing {
    let slices = beta.slices(false);
    let grid = &beta.collar.grid;
    let (mut current, mut remainder) = (0.0, 0.0);
    for (m, s) in slices.iter().enumerate() {
        let Some(s) = s else { continue };
        let (mut c, mut r) = (0.0, 0.0);
        for k in 0..grid.len() {
            let x = beta.collar.position(k, s.rho);
            let w = beta.collar.weight(k, m);
            c += w * s.j[k].dot(&p(x));
            r += w * s.b[k].dot(&curl_p(x));
        }
        current += c;
        remainder += r;
    }
    let tr = beta.trace();
    let w = grid.weights();
    let boundary = (0..grid.len())
        .map(|k| {
            let nd = &grid.nodes[k];
            w[k] * tr[k].cross(&p(nd.chart.x)).dot(&nd.n)
        })
        .sum();
    Pairing { current, boundary, remainder }
}
