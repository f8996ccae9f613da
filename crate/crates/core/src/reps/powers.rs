use nalgebra::DMatrix;

use super::{ProjectiveMatrix, Representation};
use crate::error::{Error, Result};

/// Action of a 2x2 matrix on degree `d-1` binary forms, basis
/// `x^{d-1}, x^{d-2} y, ..., y^{d-1}`.
pub fn sym_power_matrix(g: &DMatrix<f64>, d: usize) -> Result<DMatrix<f64>> {
    if g.shape() != (2, 2) {
        return Err(Error::Dimension {
            expected: 2,
            got: g.nrows(),
        });
    }
    if d < 2 {
        return Err(Error::InvalidArgument(format!("symmetric power needs d >= 2, got {d}")));
    }
    let m = d - 1;
    let (a, b, c, dd) = (g[(0, 0)], g[(0, 1)], g[(1, 0)], g[(1, 1)]);
    let mut out = DMatrix::zeros(d, d);
    for j in 0..d {
        // (a x + c y)^{m-j} (b x + dd y)^j, coefficients indexed by power of y
        let mut poly = vec![1.0];
        for _ in 0..m - j {
            poly = mul_linear(&poly, a, c);
        }
        for _ in 0..j {
            poly = mul_linear(&poly, b, dd);
        }
        for (i, v) in poly.into_iter().enumerate() {
            out[(i, j)] = v;
        }
    }
    Ok(out)
}

fn mul_linear(p: &[f64], x: f64, y: f64) -> Vec<f64> {
    let mut out = vec![0.0; p.len() + 1];
    for (i, &v) in p.iter().enumerate() {
        out[i] += v * x;
        out[i + 1] += v * y;
    }
    out
}

pub fn sym_power_rep(rep2: &Representation, d: usize) -> Result<Representation> {
    if rep2.dim() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            got: rep2.dim(),
        });
    }
    rep2.map_generators(format!("sym{d}({})", rep2.label()), |g| {
        ProjectiveMatrix::from_pair(
            sym_power_matrix(&g.entries(), d)?,
            sym_power_matrix(&g.inverse_entries(), d)?,
        )
    })
}

/// Lexicographically ordered `n`-subsets of `0..d`.
pub fn subsets(d: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    fn go(start: usize, d: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for i in start..d {
            cur.push(i);
            go(i + 1, d, n, cur, out);
            cur.pop();
        }
    }
    go(0, d, n, &mut cur, &mut out);
    out
}

/// Matrix of `n x n` minors on the lexicographic wedge basis.
pub fn exterior_power_matrix(g: &DMatrix<f64>, n: usize) -> Result<DMatrix<f64>> {
    let d = g.nrows();
    if n == 0 || n > d {
        return Err(Error::InvalidArgument(format!("exterior power {n} of dimension {d}")));
    }
    let idx = subsets(d, n);
    let k = idx.len();
    let mut out = DMatrix::zeros(k, k);
    let mut sub = DMatrix::zeros(n, n);
    for (r, rows) in idx.iter().enumerate() {
        for (c, cols) in idx.iter().enumerate() {
            for (i, &ri) in rows.iter().enumerate() {
                for (j, &cj) in cols.iter().enumerate() {
                    sub[(i, j)] = g[(ri, cj)];
                }
            }
            out[(r, c)] = sub.clone().lu().determinant();
        }
    }
    Ok(out)
}

pub fn exterior_power_rep(rep: &Representation, n: usize) -> Result<Representation> {
    if n == 0 || n >= rep.dim() {
        return Err(Error::InvalidArgument(format!(
            "exterior power needs 1 <= n <= d-1, got n={n}, d={}",
            rep.dim()
        )));
    }
    rep.map_generators(format!("ext{n}({})", rep.label()), |g| {
        ProjectiveMatrix::from_pair(
            exterior_power_matrix(&g.entries(), n)?,
            exterior_power_matrix(&g.inverse_entries(), n)?,
        )
    })
}
