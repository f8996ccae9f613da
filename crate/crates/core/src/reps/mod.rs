//! Matrix representations of free groups.

mod adjoint;
mod powers;
mod schottky;

pub use adjoint::{adjoint_irreducible, adjoint_matrix, AdjointRep};
pub use powers::{exterior_power_matrix, exterior_power_rep, sym_power_matrix, sym_power_rep};
pub use schottky::{
    boost, embed_klein, klein_of_psl2, klein_schottky, psl2_generator, psl2_schottky, Axes,
    PingPongCertificate, SchottkyGenerator, SchottkyParams,
};

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::words::{Letter, Word};

/// Factors multiplied between two rescalings in [`Representation::evaluate`].
pub const RENORM_EVERY: usize = 8;

/// An element of PGL(d, R) kept together with its inverse.
///
/// The represented matrix is `exp(log_scale) * m` and has `|det| = 1`.
/// Long products keep `m` at unit max-entry and move the size into
/// `log_scale`, so nothing overflows.
#[derive(Clone, Debug)]
pub struct ProjectiveMatrix {
    m: DMatrix<f64>,
    log_scale: f64,
    inv: DMatrix<f64>,
    inv_log_scale: f64,
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

fn det_log_abs(m: &DMatrix<f64>) -> Result<f64> {
    let det = m.clone().lu().determinant();
    if !det.is_finite() || det == 0.0 {
        return Err(Error::Singular);
    }
    Ok(det.abs().ln())
}

impl ProjectiveMatrix {
    /// Normalizes an invertible square matrix to `|det| = 1`.
    ///
    /// Matrices already within 1e-12 of unit determinant are stored verbatim,
    /// which keeps serialization round trips bit-exact.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::Dimension {
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::Singular);
        }
        let d = m.nrows() as f64;
        let ld = det_log_abs(&m)?;
        let m = if ld.abs() <= 1e-12 { m } else { m * (-ld / d).exp() };
        let inv = m.clone().try_inverse().ok_or(Error::Singular)?;
        Ok(ProjectiveMatrix {
            m,
            log_scale: 0.0,
            inv,
            inv_log_scale: 0.0,
        })
    }

    /// Builds from a matrix and its known inverse, normalizing both.
    pub fn from_pair(m: DMatrix<f64>, inv: DMatrix<f64>) -> Result<Self> {
        if m.shape() != inv.shape() || !m.is_square() {
            return Err(Error::Dimension {
                expected: m.nrows(),
                got: inv.nrows(),
            });
        }
        let d = m.nrows() as f64;
        let ld = det_log_abs(&m)?;
        let c = -ld / d;
        let (m, inv) = if ld.abs() <= 1e-12 {
            (m, inv)
        } else {
            (m * c.exp(), inv * (-c).exp())
        };
        Ok(ProjectiveMatrix {
            m,
            log_scale: 0.0,
            inv,
            inv_log_scale: 0.0,
        })
    }

    pub fn identity(d: usize) -> Self {
        ProjectiveMatrix {
            m: DMatrix::identity(d, d),
            log_scale: 0.0,
            inv: DMatrix::identity(d, d),
            inv_log_scale: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    /// The matrix entries, `exp(log_scale) * m`.
    pub fn entries(&self) -> DMatrix<f64> {
        if self.log_scale == 0.0 {
            self.m.clone()
        } else {
            &self.m * self.log_scale.exp()
        }
    }

    pub fn inverse_entries(&self) -> DMatrix<f64> {
        if self.inv_log_scale == 0.0 {
            self.inv.clone()
        } else {
            &self.inv * self.inv_log_scale.exp()
        }
    }

    /// Scaled forward matrix and its log scale.
    pub fn scaled(&self) -> (&DMatrix<f64>, f64) {
        (&self.m, self.log_scale)
    }

    pub fn scaled_inverse(&self) -> (&DMatrix<f64>, f64) {
        (&self.inv, self.inv_log_scale)
    }

    pub fn inverse(&self) -> Self {
        ProjectiveMatrix {
            m: self.inv.clone(),
            log_scale: self.inv_log_scale,
            inv: self.m.clone(),
            inv_log_scale: self.log_scale,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut p = ProjectiveMatrix {
            m: &self.m * &other.m,
            log_scale: self.log_scale + other.log_scale,
            inv: &other.inv * &self.inv,
            inv_log_scale: self.inv_log_scale + other.inv_log_scale,
        };
        p.rescale();
        p
    }

    pub fn pow(&self, n: usize) -> Self {
        let mut acc = ProjectiveMatrix::identity(self.dim());
        for i in 0..n {
            acc = acc.mul_raw(self);
            if (i + 1) % RENORM_EVERY == 0 {
                acc.rescale();
            }
        }
        acc.rescale();
        acc
    }

    fn mul_raw(&self, other: &Self) -> Self {
        ProjectiveMatrix {
            m: &self.m * &other.m,
            log_scale: self.log_scale + other.log_scale,
            inv: &other.inv * &self.inv,
            inv_log_scale: self.inv_log_scale + other.inv_log_scale,
        }
    }

    /// Moves the max entry of both factors into the log scales.
    pub fn rescale(&mut self) {
        for (m, s) in [
            (&mut self.m, &mut self.log_scale),
            (&mut self.inv, &mut self.inv_log_scale),
        ] {
            let a = max_abs(m);
            if a > 0.0 && a.is_finite() {
                *m /= a;
                *s += a.ln();
            }
        }
    }

    /// `g x g^{-1}` for a fixed invertible `g`.
    pub fn conjugate_by(&self, g: &ProjectiveMatrix) -> Self {
        g.mul(self).mul(&g.inverse())
    }
}

/// Images of the free generators.
#[derive(Clone, Debug)]
pub struct Representation {
    dim: usize,
    generators: Vec<ProjectiveMatrix>,
    label: String,
}

impl Representation {
    pub fn new(generators: Vec<ProjectiveMatrix>, label: impl Into<String>) -> Result<Self> {
        let dim = generators
            .first()
            .map(|g| g.dim())
            .ok_or_else(|| Error::InvalidArgument("representation needs a generator".into()))?;
        for g in &generators {
            if g.dim() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    got: g.dim(),
                });
            }
        }
        Ok(Representation {
            dim,
            generators,
            label: label.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn generators(&self) -> &[ProjectiveMatrix] {
        &self.generators
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn letter_image(&self, l: Letter) -> Result<ProjectiveMatrix> {
        let g = self.generators.get(l.generator()).ok_or(Error::LetterOutOfRange {
            letter: l.to_string(),
            rank: self.rank(),
        })?;
        Ok(if l.is_inverse() { g.inverse() } else { g.clone() })
    }

    /// Ordered product of letter images, rescaled every [`RENORM_EVERY`] factors.
    pub fn evaluate(&self, w: &Word) -> Result<ProjectiveMatrix> {
        self.evaluate_letters(w.letters())
    }

    pub fn evaluate_letters(&self, letters: &[Letter]) -> Result<ProjectiveMatrix> {
        let mut acc = ProjectiveMatrix::identity(self.dim);
        for (i, &l) in letters.iter().enumerate() {
            if l.generator() >= self.rank() {
                return Err(Error::LetterOutOfRange {
                    letter: l.to_string(),
                    rank: self.rank(),
                });
            }
            let g = &self.generators[l.generator()];
            acc = if l.is_inverse() {
                acc.mul_raw(&g.inverse())
            } else {
                acc.mul_raw(g)
            };
            if (i + 1) % RENORM_EVERY == 0 {
                acc.rescale();
            }
        }
        acc.rescale();
        Ok(acc)
    }

    /// Applies `f` to each generator image.
    pub fn map_generators<F>(&self, label: impl Into<String>, f: F) -> Result<Self>
    where
        F: Fn(&ProjectiveMatrix) -> Result<ProjectiveMatrix>,
    {
        let gens = self.generators.iter().map(f).collect::<Result<Vec<_>>>()?;
        Representation::new(gens, label)
    }

    pub fn conjugate_by(&self, g: &ProjectiveMatrix) -> Result<Self> {
        if g.dim() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: g.dim(),
            });
        }
        self.map_generators(format!("{}^g", self.label), |x| Ok(x.conjugate_by(g)))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&RepresentationDoc::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: RepresentationDoc = serde_json::from_str(s)?;
        doc.try_into()
    }
}

/// Serialized form: row-major flattened generator matrices.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RepresentationDoc {
    pub dim: usize,
    pub generators: Vec<Vec<f64>>,
    pub label: String,
}

impl From<&Representation> for RepresentationDoc {
    fn from(rep: &Representation) -> Self {
        let generators = rep
            .generators
            .iter()
            .map(|g| {
                let e = g.entries();
                let d = e.nrows();
                (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).map(|(i, j)| e[(i, j)]).collect()
            })
            .collect();
        RepresentationDoc {
            dim: rep.dim,
            generators,
            label: rep.label.clone(),
        }
    }
}

impl TryFrom<RepresentationDoc> for Representation {
    type Error = Error;

    fn try_from(doc: RepresentationDoc) -> Result<Self> {
        let d = doc.dim;
        let gens = doc
            .generators
            .into_iter()
            .map(|flat| {
                if flat.len() != d * d {
                    return Err(Error::Dimension {
                        expected: d * d,
                        got: flat.len(),
                    });
                }
                ProjectiveMatrix::new(DMatrix::from_row_slice(d, d, &flat))
            })
            .collect::<Result<Vec<_>>>()?;
        Representation::new(gens, doc.label)
    }
}

/// Adds to each generator a Gaussian matrix rescaled to operator norm `eps`.
pub fn perturb(rep: &Representation, eps: f64, seed: u64) -> Result<Representation> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::InvalidArgument(format!("eps must be finite and >= 0, got {eps}")));
    }
    let label = format!("perturb({},{eps},{seed})", rep.label);
    if eps == 0.0 {
        return Ok(rep.clone().with_label(label));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rep.dim;
    let gens = rep
        .generators
        .iter()
        .map(|g| {
            let noise = DMatrix::<f64>::from_fn(d, d, |_, _| StandardNormal.sample(&mut rng));
            let norm = noise.clone().svd(false, false).singular_values.max();
            ProjectiveMatrix::new(g.entries() + noise * (eps / norm))
        })
        .collect::<Result<Vec<_>>>()?;
    Representation::new(gens, label)
}

/// Diagonal-matrix helper used across tests and examples.
pub fn diag(values: &[f64]) -> Result<ProjectiveMatrix> {
    ProjectiveMatrix::new(DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(values)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rep2() -> Representation {
        let a = ProjectiveMatrix::new(DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 1.0])).unwrap();
        let b = diag(&[2.0, 0.5]).unwrap();
        Representation::new(vec![a, b], "test").unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let rep = rep2();
        let m = rep.evaluate(&"bb".parse().unwrap()).unwrap().entries();
        assert_relative_eq!(m, DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 0.25]), epsilon = 1e-12);
        let a = rep.evaluate(&"a".parse().unwrap()).unwrap().entries();
        assert_relative_eq!(a, DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 1.0]), epsilon = 1e-12);
        assert_relative_eq!(a.determinant(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn normalization() {
        let m = ProjectiveMatrix::new(DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 1.0])).unwrap();
        assert_relative_eq!(m.entries().determinant(), 1.0, epsilon = 1e-12);
        assert!(ProjectiveMatrix::new(DMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn long_words_stay_finite() {
        let rep = rep2();
        let w: Word = "ab".repeat(200).parse().unwrap();
        let m = rep.evaluate(&w).unwrap();
        let (s, ls) = m.scaled();
        assert!(s.iter().all(|x| x.is_finite()));
        assert!(ls > 100.0);
        let l = crate::spectral::lambda1(&m).unwrap();
        let l1 = crate::spectral::lambda1(&rep.evaluate(&"ab".parse().unwrap()).unwrap()).unwrap();
        assert_relative_eq!(l, 200.0 * l1, max_relative = 1e-12);
    }

    #[test]
    fn homomorphism() {
        let rep = rep2();
        let u: Word = "aab".parse().unwrap();
        let v: Word = "bAb".parse().unwrap();
        let uv = rep.evaluate(&u.mul(&v).unwrap()).unwrap().entries();
        let prod = rep.evaluate(&u).unwrap().mul(&rep.evaluate(&v).unwrap()).entries();
        assert_relative_eq!(uv, prod, max_relative = 1e-10);
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let rep = perturb(&rep2(), 0.3, 9).unwrap();
        let s = rep.to_json().unwrap();
        let back = Representation::from_json(&s).unwrap();
        assert_eq!(RepresentationDoc::from(&back), RepresentationDoc::from(&rep));
        assert!(Representation::from_json(r#"{"dim":2,"generators":[[1,0,0]],"label":""}"#).is_err());
    }

    #[test]
    fn perturb_zero_is_identity() {
        let rep = rep2();
        let p = perturb(&rep, 0.0, 1).unwrap();
        assert_eq!(RepresentationDoc::from(&p).generators, RepresentationDoc::from(&rep).generators);
        let q = perturb(&rep, 0.1, 1).unwrap();
        let r = perturb(&rep, 0.1, 1).unwrap();
        assert_eq!(RepresentationDoc::from(&q), RepresentationDoc::from(&r));
        assert!(perturb(&rep, -1.0, 1).is_err());
    }

    #[test]
    fn letters_out_of_range() {
        let rep = rep2();
        assert!(matches!(
            rep.evaluate(&"c".parse().unwrap()),
            Err(Error::LetterOutOfRange { .. })
        ));
    }
}
