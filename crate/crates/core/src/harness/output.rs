//! CSV writers. Floats carry 17 significant digits so files round-trip exactly.

use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::SurfaceGrid;
use crate::vec3::Vec3;

pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn write_rows(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(&r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// `trace.csv`: field and sheet current on the nodes; `gamma_u`, `gamma_v` are
/// components along the unit vectors `X_u / |X_u|`, `X_v / |X_v|`.
pub fn write_trace(path: &Path, grid: &SurfaceGrid, field: &[Vec3], gamma: &[Vec3]) -> Result<()> {
    let header = ["u", "v", "x", "y", "z", "Bx", "By", "Bz", "Bn", "|Btan|", "gamma_u", "gamma_v"];
    let rows = grid.nodes.iter().zip(field.iter().zip(gamma)).map(|(nd, (b, g))| {
        let bn = b.dot(&nd.n);
        let bt = (b - nd.n * bn).norm();
        let x = nd.chart.x;
        [
            nd.u,
            nd.v,
            x.x,
            x.y,
            x.z,
            b.x,
            b.y,
            b.z,
            bn,
            bt,
            g.dot(&nd.chart.xu.normalize()),
            g.dot(&nd.chart.xv.normalize()),
        ]
        .map(fmt)
        .to_vec()
    });
    write_rows(path, &header, rows)
}

/// `sweep.csv`: one `(lambda, metric_name, value)` row per measurement.
pub fn write_sweep(path: &Path, rows: &[(f64, String, f64)]) -> Result<()> {
    write_rows(path, &["lambda", "metric_name", "value"], rows.iter().map(|(l, m, v)| vec![fmt(*l), m.clone(), fmt(*v)]))
}

/// `spectrum.csv`: `(index, eigenvalue)`.
pub fn write_spectrum(path: &Path, values: &[f64]) -> Result<()> {
    write_rows(path, &["index", "eigenvalue"], values.iter().enumerate().map(|(i, v)| vec![i.to_string(), fmt(*v)]))
}
