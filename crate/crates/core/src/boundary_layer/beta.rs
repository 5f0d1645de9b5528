use rayon::prelude::*;

use super::profile::{e_jet, CutoffProfile};
use crate::error::{Error, Result};
use crate::geometry::CollarGrid;
use crate::limit_solver::TangentField;
use crate::vec3::{Jet, Mat3, Vec3, VecJet};

/// Slices with `rho / lambda` below this carry no measurable weight.
const NEGLIGIBLE_DECAY: f64 = -60.0;

/// `beta = f drho ^ gamma + E dgamma` on the collar, stored through its
/// vector proxy `B` with `beta = i_B dV`:
///
/// `B = (f (-gamma_v x_u + gamma_u x_v) + E c n) / det J`, `c = d_u gamma_v - d_v gamma_u`.
#[derive(Clone, Debug)]
pub struct BetaField {
    pub collar: CollarGrid,
    pub lambda: f64,
    pub cutoff: CutoffProfile,
    /// Cartesian `gamma0`.
    pub gamma: Vec<Vec3>,
    pub gamma_u: Vec<f64>,
    pub gamma_v: Vec<f64>,
    pub curl_c: Vec<f64>,
    /// Relative L2 mismatch of the tangential trace against `n x gamma0` or a reference.
    pub trace_error: f64,
}

/// Fields of one constant-`rho` slice.
#[derive(Clone, Debug, Default)]
pub struct Slice {
    pub rho: f64,
    pub b: Vec<Vec3>,
    pub j: Vec<Vec3>,
    pub residual: Vec<Vec3>,
    pub div: Vec<f64>,
    /// Largest entry of `grad B` on the slice, the scale for `div`.
    pub grad_scale: f64,
}

pub fn build_beta(collar: CollarGrid, gamma0: &TangentField, lambda: f64) -> Result<BetaField> {
    build_beta_checked(collar, gamma0, lambda, None)
}

/// Builds `beta` and checks its tangential trace against `reference` (default `n x gamma0`).
pub fn build_beta_checked(
    collar: CollarGrid,
    gamma0: &TangentField,
    lambda: f64,
    reference: Option<&[Vec3]>,
) -> Result<BetaField> {
    let grid = collar.grid.clone();
    if gamma0.values.len() != grid.len() {
        return Err(Error::GridMismatch(format!("gamma0 {} vs grid {}", gamma0.values.len(), grid.len())));
    }
    if !(lambda > 0.0) {
        return Err(Error::Config(format!("lambda = {lambda}")));
    }
    let gamma = gamma0.values.clone();
    let gamma_u: Vec<f64> = grid.nodes.iter().zip(&gamma).map(|(n, g)| g.dot(&n.chart.xu)).collect();
    let gamma_v: Vec<f64> = grid.nodes.iter().zip(&gamma).map(|(n, g)| g.dot(&n.chart.xv)).collect();
    // d_u (g . X_v) - d_v (g . X_u); the X_uv terms cancel
    let (gu, gv) = grid.diff_vec(&gamma);
    let curl_c: Vec<f64> =
        grid.nodes.iter().enumerate().map(|(k, n)| gu[k].dot(&n.chart.xv) - gv[k].dot(&n.chart.xu)).collect();
    let mut beta = BetaField {
        cutoff: CutoffProfile::new(collar.r0),
        collar,
        lambda,
        gamma,
        gamma_u,
        gamma_v,
        curl_c,
        trace_error: 0.0,
    };
    let tr = beta.tangential_trace();
    let expected: Vec<Vec3> = match reference {
        Some(r) => grid.nodes.iter().zip(r).map(|(n, b)| b - n.n * b.dot(&n.n)).collect(),
        None => grid.nodes.iter().zip(&beta.gamma).map(|(n, g)| n.n.cross(g)).collect(),
    };
    let diff: Vec<Vec3> = tr.iter().zip(&expected).map(|(a, b)| a - b).collect();
    let den = grid.l2_vec(&expected);
    beta.trace_error = if den > 0.0 { grid.l2_vec(&diff) / den } else { grid.l2_vec(&diff) };
    if beta.trace_error > 1e-6 {
        return Err(Error::TraceIdentity(beta.trace_error));
    }
    Ok(beta)
}

impl BetaField {
    /// Tangential part of `B` at `rho = 0`.
    pub fn tangential_trace(&self) -> Vec<Vec3> {
        let grid = &self.collar.grid;
        grid.nodes
            .iter()
            .enumerate()
            .map(|(k, nd)| (nd.chart.xu * (-self.gamma_v[k]) + nd.chart.xv * self.gamma_u[k]) / nd.jac)
            .collect()
    }

    /// `B` at `rho = 0` including the normal part `E(0) c n / |N|`.
    pub fn trace(&self) -> Vec<Vec3> {
        let e0 = e_jet(0.0, self.lambda, &self.cutoff).v;
        let grid = &self.collar.grid;
        self.tangential_trace()
            .into_iter()
            .zip(&grid.nodes)
            .enumerate()
            .map(|(k, (t, nd))| t + nd.n * (e0 * self.curl_c[k] / nd.jac))
            .collect()
    }

    /// Whether the slice at `rho` is numerically zero.
    pub fn negligible(&self, rho: f64) -> bool {
        rho <= -2.0 * self.collar.r0 || rho / self.lambda < NEGLIGIBLE_DECAY
    }

    /// Proxy `B` with its first two `rho`-derivatives at node `k`.
    pub fn b_jet(&self, k: usize, rho: f64, f: Jet, e: Jet) -> VecJet {
        let nd = &self.collar.grid.nodes[k];
        let (a0, a1) = (nd.chart.xu, nd.dn_du);
        let (b0, b1) = (nd.chart.xv, nd.dn_dv);
        let a = a0 + a1 * rho;
        let b = b0 + b1 * rho;
        let (gu, gv) = (self.gamma_u[k], self.gamma_v[k]);
        let t = VecJet { v: b * gu - a * gv, d: b1 * gu - a1 * gv, dd: Vec3::zeros() };
        let det = Jet::new(
            a.cross(&b).dot(&nd.n),
            (a1.cross(&b) + a.cross(&b1)).dot(&nd.n),
            2.0 * a1.cross(&b1).dot(&nd.n),
        );
        let num = t.mul_jet(f).add(&VecJet::constant(nd.n * self.curl_c[k]).mul_jet(e));
        num.mul_jet(det.recip())
    }

    /// `B`, `j = curl B`, `curl j + B / lambda^2` and `div B` on the slice at `rho`.
    pub fn slice(&self, rho: f64, with_residual: bool) -> Slice {
        let grid = &self.collar.grid;
        let n = grid.len();
        let f = self.cutoff.f(rho, self.lambda);
        let e = e_jet(rho, self.lambda, &self.cutoff);
        let jets: Vec<VecJet> = (0..n).map(|k| self.b_jet(k, rho, f, e)).collect();
        let bv: Vec<Vec3> = jets.iter().map(|j| j.v).collect();
        let bd: Vec<Vec3> = jets.iter().map(|j| j.d).collect();
        let (bu, bvv) = grid.diff_vec(&bv);
        let jinv: Vec<Mat3> = (0..n)
            .map(|k| self.collar.jacobian(k, rho).try_inverse().unwrap_or_else(Mat3::zeros))
            .collect();
        let mut j = vec![Vec3::zeros(); n];
        let mut div = vec![0.0; n];
        let mut grad_scale = 0.0f64;
        for k in 0..n {
            let g = Mat3::from_columns(&[bu[k], bvv[k], bd[k]]) * jinv[k];
            j[k] = curl_of(&g);
            div[k] = g.trace();
            grad_scale = grad_scale.max(g.abs().max());
        }
        let mut residual = Vec::new();
        if with_residual {
            let (bdu, bdv) = grid.diff_vec(&bd);
            let (ju, jv) = grid.diff_vec(&j);
            residual = (0..n)
                .map(|k| {
                    let nd = &grid.nodes[k];
                    let jp = Mat3::from_columns(&[nd.dn_du, nd.dn_dv, Vec3::zeros()]);
                    let dinv = -jinv[k] * jp * jinv[k];
                    let m = Mat3::from_columns(&[bu[k], bvv[k], bd[k]]);
                    let mp = Mat3::from_columns(&[bdu[k], bdv[k], jets[k].dd]);
                    let gp = mp * jinv[k] + m * dinv;
                    let jr = curl_of(&gp);
                    let gj = Mat3::from_columns(&[ju[k], jv[k], jr]) * jinv[k];
                    curl_of(&gj) + bv[k] / (self.lambda * self.lambda)
                })
                .collect();
        }
        Slice { rho, b: bv, j, residual, div, grad_scale }
    }

    /// Slices at every collar node in parallel; negligible slices are returned empty.
    pub fn slices(&self, with_residual: bool) -> Vec<Option<Slice>> {
        self.collar
            .rho
            .nodes
            .par_iter()
            .map(|&r| if self.negligible(r) { None } else { Some(self.slice(r, with_residual)) })
            .collect()
    }
}

/// Curl from the Jacobian `g_ij = d B_i / d x_j`.
pub fn curl_of(g: &Mat3) -> Vec3 {
    Vec3::new(g[(2, 1)] - g[(1, 2)], g[(0, 2)] - g[(2, 0)], g[(1, 0)] - g[(0, 1)])
}
