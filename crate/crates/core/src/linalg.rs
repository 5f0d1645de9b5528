//! Thin wrappers over `faer` for the dense operations used by the solvers.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};

use crate::error::{Error, Result};

pub type Dense = Mat<f64>;

/// Restricts dense kernels to the calling thread (deterministic reductions).
pub fn set_sequential(seq: bool) {
    if seq {
        faer::set_global_parallelism(faer::Par::Seq);
    } else {
        let n = rayon::current_num_threads().max(1);
        faer::set_global_parallelism(faer::Par::rayon(n));
    }
}

pub fn from_row_major(nrows: usize, ncols: usize, data: &[f64]) -> Dense {
    assert_eq!(data.len(), nrows * ncols);
    Mat::from_fn(nrows, ncols, |i, j| data[i * ncols + j])
}

pub fn from_rows(rows: &[Vec<f64>]) -> Dense {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    Mat::from_fn(n, m, |i, j| rows[i][j])
}

pub fn column(v: &[f64]) -> Dense {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

pub fn to_vec(col: &Dense) -> Vec<f64> {
    (0..col.nrows()).map(|i| col[(i, 0)]).collect()
}

pub fn matvec(a: &Dense, x: &[f64]) -> Vec<f64> {
    assert_eq!(a.ncols(), x.len());
    let y = a * column(x);
    to_vec(&y)
}

pub fn transpose_matvec(a: &Dense, x: &[f64]) -> Vec<f64> {
    assert_eq!(a.nrows(), x.len());
    let y = a.transpose() * column(x);
    to_vec(&y)
}

/// Solves `a x = b` by LU with partial pivoting and rejects non-finite output.
pub fn solve(a: &Dense, b: &[f64]) -> Result<Vec<f64>> {
    if a.nrows() != a.ncols() || a.nrows() != b.len() {
        return Err(Error::SolveFailed(format!(
            "shape mismatch {}x{} vs {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    let lu = a.partial_piv_lu();
    let x = to_vec(&lu.solve(column(b)));
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SolveFailed("non-finite solution".into()));
    }
    Ok(x)
}

/// Relative residual `|a x - b| / max(|b|, tiny)`.
pub fn residual(a: &Dense, x: &[f64], b: &[f64]) -> f64 {
    let ax = matvec(a, x);
    let num: f64 = ax.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|q| q * q).sum::<f64>().sqrt().max(1e-300);
    num / den
}

/// `(a + a^T) / 2`.
pub fn symmetrize(a: &Dense) -> Dense {
    let n = a.nrows();
    Mat::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]))
}

/// Largest absolute entry of `a - a^T` relative to the largest entry of `a`.
pub fn asymmetry(a: &Dense) -> f64 {
    let n = a.nrows();
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            num = num.max((a[(i, j)] - a[(j, i)]).abs());
            den = den.max(a[(i, j)].abs());
        }
    }
    num / den.max(1e-300)
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(a: &Dense) -> Result<Vec<f64>> {
    a.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))
}

/// Eigenvalues of the symmetric-definite pencil `k x = mu m x`, ascending.
pub fn generalized_symmetric_eigenvalues(k: &Dense, m: &Dense) -> Result<Vec<f64>> {
    let llt = m.llt(Side::Lower).map_err(|_| Error::NotPositiveDefinite)?;
    let l = llt.L().to_owned();
    let mut x = k.to_owned();
    l.solve_lower_triangular_in_place(x.as_mut());
    let mut c = x.transpose().to_owned();
    l.solve_lower_triangular_in_place(c.as_mut());
    symmetric_eigenvalues(&symmetrize(&c))
}

/// Eigenvalues of a general real matrix as `(re, im)` pairs, unsorted.
pub fn general_eigenvalues(a: &Dense) -> Result<Vec<(f64, f64)>> {
    let ev = a.eigenvalues().map_err(|e| Error::Eigen(format!("{e:?}")))?;
    Ok(ev.into_iter().map(|z| (z.re, z.im)).collect())
}

/// Spectral norm estimate by power iteration on `a^T a`.
pub fn spectral_norm(a: &Dense, iters: usize) -> f64 {
    let n = a.ncols();
    if n == 0 {
        return 0.0;
    }
    // deterministic start vector with energy in every mode
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 7919) % 101) as f64 / 101.0).collect();
    let mut sigma = 0.0;
    for _ in 0..iters {
        let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if nx == 0.0 {
            return 0.0;
        }
        x.iter_mut().for_each(|v| *v /= nx);
        let ax = matvec(a, &x);
        let next = transpose_matvec(a, &ax);
        let s2: f64 = x.iter().zip(&next).map(|(p, q)| p * q).sum();
        let s = s2.max(0.0).sqrt();
        if (s - sigma).abs() <= 1e-10 * s {
            return s;
        }
        sigma = s;
        x = next;
    }
    sigma
}

/// `d1 a d2` for diagonal scalings given as slices.
pub fn scale_rows_cols(a: &Dense, left: &[f64], right: &[f64]) -> Dense {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| left[i] * a[(i, j)] * right[j])
}

/// Writes a matrix as `u64 nrows, u64 ncols` followed by row-major `f64`, all little-endian.
pub fn dump_binary(a: &Dense, path: &std::path::Path) -> Result<()> {
    use std::io::Write;
    let mut buf = Vec::with_capacity(16 + 8 * a.nrows() * a.ncols());
    buf.extend_from_slice(&(a.nrows() as u64).to_le_bytes());
    buf.extend_from_slice(&(a.ncols() as u64).to_le_bytes());
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            buf.extend_from_slice(&a[(i, j)].to_le_bytes());
        }
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(&buf)?;
    Ok(())
}

pub fn load_binary(path: &std::path::Path) -> Result<Dense> {
    let bytes = std::fs::read(path)?;
    if bytes.len() < 16 {
        return Err(Error::Config("matrix dump too short".into()));
    }
    let rd = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let (n, m) = (rd(0) as usize, rd(8) as usize);
    if bytes.len() != 16 + 8 * n * m {
        return Err(Error::Config("matrix dump size mismatch".into()));
    }
    Ok(Mat::from_fn(n, m, |i, j| {
        let o = 16 + 8 * (i * m + j);
        f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap())
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_and_generalized_eigen() {
        let a = from_rows(&[vec![4.0, 1.0], vec![1.0, 3.0]]);
        let x = solve(&a, &[1.0, 2.0]).unwrap();
        assert!(residual(&a, &x, &[1.0, 2.0]) < 1e-14);
        let m = from_rows(&[vec![2.0, 0.0], vec![0.0, 1.0]]);
        let ev = generalized_symmetric_eigenvalues(&a, &m).unwrap();
        // det(A - mu M) = (4 - 2mu)(3 - mu) - 1
        let disc = (10.0f64 * 10.0 - 4.0 * 2.0 * 11.0).sqrt();
        assert!((ev[0] - (10.0 - disc) / 4.0).abs() < 1e-13);
        assert!((ev[1] - (10.0 + disc) / 4.0).abs() < 1e-13);
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let a = from_rows(&[vec![3.0, 0.0], vec![0.0, -5.0]]);
        assert!((spectral_norm(&a, 200) - 5.0).abs() < 1e-8);
    }

    #[test]
    fn binary_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.bin");
        let a = from_rows(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]);
        dump_binary(&a, &p).unwrap();
        let b = load_binary(&p).unwrap();
        assert_eq!(b.nrows(), 2);
        assert_eq!(b[(1, 2)], 6.0);
        let raw = std::fs::read(&p).unwrap();
        assert_eq!(u64::from_le_bytes(raw[0..8].try_into().unwrap()), 2);
        assert_eq!(f64::from_le_bytes(raw[16..24].try_into().unwrap()), 1.0);
    }
}
