use nalgebra::{DMatrix, DVector};

use super::{ProjectiveMatrix, Representation};
use crate::error::{Error, Result};
use crate::spectral::{proximality_data, PROXIMAL_TOL};
use crate::words::Word;

/// Relative singular-value cutoff for the span dimension.
pub const SPAN_TOL: f64 = 1e-8;

/// `Ad(g)` on column-major vectorized matrices: `vec(g T g^{-1})`.
pub fn adjoint_matrix(g: &ProjectiveMatrix) -> DMatrix<f64> {
    g.inverse_entries().transpose().kronecker(&g.entries())
}

/// Restriction of `Ad rho` to the span of the rank-one matrices `v theta^T`.
#[derive(Clone, Debug)]
pub struct AdjointRep {
    pub rep: Representation,
    /// Orthonormal basis of the span, as columns of vectorized matrices.
    pub basis: DMatrix<f64>,
    pub span_dim: usize,
    pub source_dim: usize,
}

impl AdjointRep {
    /// Coordinates of `v theta^T` in the basis.
    pub fn line(&self, v: &DVector<f64>, theta: &DVector<f64>) -> DVector<f64> {
        self.basis.transpose() * vec_outer(v, theta)
    }

    /// Coordinates of the functional `T -> theta(T v)` in the dual basis.
    pub fn covector(&self, v: &DVector<f64>, theta: &DVector<f64>) -> DVector<f64> {
        self.basis.transpose() * vec_outer(theta, v)
    }
}

fn vec_outer(a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    let m = a * b.transpose();
    DVector::from_column_slice(m.as_slice())
}

/// Rank of a column set from its singular values.
fn span_rank(cols: &[DVector<f64>]) -> (usize, DMatrix<f64>) {
    let m = DMatrix::from_columns(cols);
    let svd = m.svd(true, false);
    let s = &svd.singular_values;
    let smax = s.max();
    let r = s.iter().filter(|x| **x > SPAN_TOL * smax).count();
    let u = svd.u.unwrap();
    // singular values are not guaranteed sorted
    let mut idx: Vec<usize> = (0..s.len()).collect();
    idx.sort_by(|a, b| s[*b].total_cmp(&s[*a]));
    let q = DMatrix::from_columns(&idx[..r].iter().map(|&i| u.column(i).into_owned()).collect::<Vec<_>>());
    (r, q)
}

pub fn adjoint_irreducible(rep: &Representation, sample_words: &[Word]) -> Result<AdjointRep> {
    if sample_words.len() < 2 {
        return Err(Error::InsufficientSampling { half: 0, full: sample_words.len() });
    }
    let mut cols = Vec::with_capacity(sample_words.len());
    for w in sample_words {
        let g = rep.evaluate(w)?;
        let p = proximality_data(&g, PROXIMAL_TOL)?.ok_or_else(|| Error::not_proximal(w))?;
        let q = proximality_data(&g.inverse(), PROXIMAL_TOL)?.ok_or_else(|| Error::not_proximal(w))?;
        let c = vec_outer(&p.attracting_line, &q.repelling_covector);
        cols.push(&c / c.norm());
    }
    let half = cols.len().div_ceil(2);
    let (r_half, _) = span_rank(&cols[..half]);
    let (r, q) = span_rank(&cols);
    if r_half != r {
        return Err(Error::InsufficientSampling { half: r_half, full: r });
    }
    let gens = rep
        .generators()
        .iter()
        .map(|g| {
            let f = q.transpose() * adjoint_matrix(g) * &q;
            let b = q.transpose() * adjoint_matrix(&g.inverse()) * &q;
            ProjectiveMatrix::from_pair(f, b)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AdjointRep {
        rep: Representation::new(gens, format!("adjoint({})", rep.label()))?,
        basis: q,
        span_dim: r,
        source_dim: rep.dim(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reps::{klein_schottky, psl2_schottky, sym_power_rep, Axes, SchottkyParams};
    use crate::spectral::{jordan_projection, lambda1};
    use crate::words::enumerate_conjugacy_classes;

    #[test]
    fn ad_is_conjugation() {
        let g = ProjectiveMatrix::new(DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 1.0])).unwrap();
        let t = DMatrix::from_row_slice(2, 2, &[0.3, -1.0, 2.0, -0.3]);
        let lhs = adjoint_matrix(&g) * DVector::from_column_slice(t.as_slice());
        let rhs = g.entries() * &t * g.inverse_entries();
        assert!((lhs - DVector::from_column_slice(rhs.as_slice())).norm() < 1e-12);
    }

    #[test]
    fn klein_span_is_traceless_symmetric_square() {
        for k in [2, 3] {
            let p = SchottkyParams::new(k, k, 2.5, Axes::Perpendicular, 0).unwrap();
            let (rep, _) = klein_schottky(&p).unwrap();
            let words = enumerate_conjugacy_classes(k, 3).unwrap();
            let ad = adjoint_irreducible(&rep, &words).unwrap();
            // rank-one J-symmetric samples span Sym^2_0, never so(1,k)
            assert_eq!(ad.span_dim, k * (k + 3) / 2);
            for w in &words[..10] {
                let a = lambda1(&ad.rep.evaluate(w).unwrap()).unwrap();
                let j = jordan_projection(&rep.evaluate(w).unwrap()).unwrap();
                assert!((a - (j.lambda1() - j.lambda_d())).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn tau3_span_is_stable() {
        let p = SchottkyParams::new(2, 2, 2.0, Axes::Perpendicular, 0).unwrap();
        let (r2, _) = psl2_schottky(&p).unwrap();
        let r = sym_power_rep(&r2, 3).unwrap();
        let w3 = enumerate_conjugacy_classes(2, 3).unwrap();
        let w5 = enumerate_conjugacy_classes(2, 5).unwrap();
        let a = adjoint_irreducible(&r, &w3).unwrap();
        let b = adjoint_irreducible(&r, &w5).unwrap();
        assert_eq!(a.span_dim, b.span_dim);
        assert_eq!(a.span_dim, 5);
    }

    #[test]
    fn too_few_samples() {
        let p = SchottkyParams::new(3, 3, 2.5, Axes::Perpendicular, 0).unwrap();
        let (rep, _) = klein_schottky(&p).unwrap();
        let words: Vec<Word> = ["a", "b", "c", "ab"].iter().map(|s| s.parse().unwrap()).collect();
        assert!(matches!(
            adjoint_irreducible(&rep, &words),
            Err(Error::InsufficientSampling { .. })
        ));
    }
}
