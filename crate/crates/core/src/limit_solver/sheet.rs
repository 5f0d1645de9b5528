use super::solve::LimitSolution;
use crate::error::Result;
use crate::vec3::Vec3;

/// Tangential vector data on the nodes of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentField {
    pub values: Vec<Vec3>,
    pub component: usize,
}

impl TangentField {
    pub fn zeros(n: usize) -> Self {
        Self { values: vec![Vec3::zeros(); n], component: 0 }
    }
}

/// Limiting sheet current `gamma0 = B_tan x n` of the total exterior field.
///
/// The physical surface current is `n x B_tan = -gamma0`; the orientation is
/// confirmed by the trace check of the boundary layer.
pub fn sheet_current(sol: &LimitSolution) -> Result<TangentField> {
    let total = sol.total_trace()?;
    let values = sol
        .grid
        .nodes
        .iter()
        .zip(&total)
        .map(|(nd, b)| {
            let bt = b - nd.n * b.dot(&nd.n);
            bt.cross(&nd.n)
        })
        .collect();
    Ok(TangentField { values, component: 0 })
}
