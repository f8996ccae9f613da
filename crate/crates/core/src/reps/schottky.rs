//! Schottky groups in SO(1,k) and PSL(2,R), certified by ping-pong.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{sym_power_matrix, ProjectiveMatrix, Representation};
use crate::error::{Error, Result};

/// Minimum angular gap between any two ping-pong caps.
pub const PING_PONG_MARGIN: f64 = 1e-6;

const MAX_RANDOM_ATTEMPTS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axes {
    /// Generator `i` translates along the coordinate axis `e_{i+1}`.
    Perpendicular,
    /// Seeded uniformly random axes, redrawn until ping-pong holds.
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchottkyGenerator {
    /// Unit vector in R^k: the attracting point is `(1, direction)`.
    pub direction: Vec<f64>,
    pub length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchottkyParams {
    pub k: usize,
    pub generators: Vec<SchottkyGenerator>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Cap {
    pub generator: usize,
    pub inverse: bool,
    pub center: Vec<f64>,
    /// Angular radius on the boundary sphere.
    pub radius: f64,
}

/// Pairwise disjoint caps `{x . c >= tanh(l/2)}` in the Klein ball.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PingPongCertificate {
    pub caps: Vec<Cap>,
    pub min_margin: f64,
}

impl SchottkyParams {
    pub fn new(k: usize, rank: usize, length: f64, axes: Axes, seed: u64) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidArgument(format!("need k >= 2, got {k}")));
        }
        if rank == 0 {
            return Err(Error::InvalidArgument("need at least one generator".into()));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidArgument(format!("length must be positive, got {length}")));
        }
        match axes {
            Axes::Perpendicular => {
                if rank > k {
                    return Err(Error::InvalidArgument(format!(
                        "{rank} perpendicular axes do not fit in H^{k}"
                    )));
                }
                let generators = (0..rank)
                    .map(|i| {
                        let mut u = vec![0.0; k];
                        u[i] = 1.0;
                        SchottkyGenerator {
                            direction: u,
                            length,
                        }
                    })
                    .collect();
                let p = SchottkyParams { k, generators };
                p.certificate()?;
                Ok(p)
            }
            Axes::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for _ in 0..MAX_RANDOM_ATTEMPTS {
                    let generators = (0..rank)
                        .map(|_| SchottkyGenerator {
                            direction: random_unit(k, &mut rng),
                            length,
                        })
                        .collect();
                    let p = SchottkyParams { k, generators };
                    if p.certificate().is_ok() {
                        return Ok(p);
                    }
                }
                Err(Error::InvalidArgument(format!(
                    "no ping-pong configuration found for rank {rank}, length {length} in H^{k}"
                )))
            }
        }
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn certificate(&self) -> Result<PingPongCertificate> {
        let mut caps = Vec::new();
        for (i, g) in self.generators.iter().enumerate() {
            if g.direction.len() != self.k {
                return Err(Error::Dimension {
                    expected: self.k,
                    got: g.direction.len(),
                });
            }
            let u = DVector::from_column_slice(&g.direction);
            let n = u.norm();
            if !(n > 0.0) || !(g.length > 0.0) {
                return Err(Error::InvalidArgument(format!("generator {i} is degenerate")));
            }
            let u = u / n;
            let radius = (g.length / 2.0).tanh().acos();
            for inverse in [false, true] {
                let c = if inverse { -&u } else { u.clone() };
                caps.push(Cap {
                    generator: i,
                    inverse,
                    center: c.iter().copied().collect(),
                    radius,
                });
            }
        }
        let mut min_margin = f64::INFINITY;
        for i in 0..caps.len() {
            for j in i + 1..caps.len() {
                let dot: f64 = caps[i].center.iter().zip(&caps[j].center).map(|(a, b)| a * b).sum();
                let angle = dot.clamp(-1.0, 1.0).acos();
                let margin = angle - caps[i].radius - caps[j].radius;
                if margin < PING_PONG_MARGIN {
                    return Err(Error::PingPong(i, j, margin));
                }
                min_margin = min_margin.min(margin);
            }
        }
        Ok(PingPongCertificate { caps, min_margin })
    }
}

fn random_unit(k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..k).map(|_| StandardNormal.sample(rng)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-8 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Hyperbolic translation of length `length` toward the boundary point `(1, u)`.
pub fn boost(u: &[f64], length: f64) -> DMatrix<f64> {
    let k = u.len();
    let (c, s) = (length.cosh(), length.sinh());
    let mut m = DMatrix::zeros(k + 1, k + 1);
    m[(0, 0)] = c;
    for i in 0..k {
        m[(0, i + 1)] = s * u[i];
        m[(i + 1, 0)] = s * u[i];
        for j in 0..k {
            m[(i + 1, j + 1)] = (c - 1.0) * u[i] * u[j] + if i == j { 1.0 } else { 0.0 };
        }
    }
    m
}

pub fn klein_schottky(params: &SchottkyParams) -> Result<(Representation, PingPongCertificate)> {
    let cert = params.certificate()?;
    let gens = params
        .generators
        .iter()
        .map(|g| {
            let n = g.direction.iter().map(|x| x * x).sum::<f64>().sqrt();
            let u: Vec<f64> = g.direction.iter().map(|x| x / n).collect();
            ProjectiveMatrix::from_pair(boost(&u, g.length), boost(&u, -g.length))
        })
        .collect::<Result<Vec<_>>>()?;
    let rep = Representation::new(gens, format!("klein(H^{})", params.k))?;
    Ok((rep, cert))
}

/// `R(a/2) diag(e^{l/2}, e^{-l/2}) R(-a/2)`: translation of length `l` in H^2
/// whose attracting point sits at angle `a` on the Klein circle.
pub fn psl2_generator(angle: f64, length: f64) -> DMatrix<f64> {
    let (c, s) = ((angle / 2.0).cos(), (angle / 2.0).sin());
    let r = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
    let d = DMatrix::from_row_slice(2, 2, &[(length / 2.0).exp(), 0.0, 0.0, (-length / 2.0).exp()]);
    &r * d * r.transpose()
}

pub fn psl2_schottky(params: &SchottkyParams) -> Result<(Representation, PingPongCertificate)> {
    if params.k != 2 {
        return Err(Error::Dimension {
            expected: 2,
            got: params.k,
        });
    }
    let cert = params.certificate()?;
    let gens = params
        .generators
        .iter()
        .map(|g| {
            let angle = g.direction[1].atan2(g.direction[0]);
            ProjectiveMatrix::from_pair(psl2_generator(angle, g.length), psl2_generator(angle, -g.length))
        })
        .collect::<Result<Vec<_>>>()?;
    let rep = Representation::new(gens, "psl2")?;
    Ok((rep, cert))
}

// (p, q, r) -> (p + r, p - r, q) carries 4pr - q^2 to the Lorentz form
fn klein_chart() -> (DMatrix<f64>, DMatrix<f64>) {
    let c = DMatrix::from_row_slice(3, 3, &[1., 0., 1., 1., 0., -1., 0., 1., 0.]);
    let ci = DMatrix::from_row_slice(3, 3, &[0.5, 0.5, 0., 0., 0., 1., 0.5, -0.5, 0.]);
    (c, ci)
}

fn klein_matrix(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (c, ci) = klein_chart();
    Ok(&c * sym_power_matrix(g, 3)? * ci)
}

/// The SO(1,2) image of a PSL(2,R) representation.
pub fn klein_of_psl2(rep2: &Representation) -> Result<Representation> {
    if rep2.dim() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            got: rep2.dim(),
        });
    }
    rep2.map_generators("klein(H^2)", |g| {
        ProjectiveMatrix::from_pair(klein_matrix(&g.entries())?, klein_matrix(&g.inverse_entries())?)
    })
}

/// Block embedding SO(1,k) -> SO(1,k') fixing the extra coordinates.
pub fn embed_klein(rep: &Representation, k_new: usize) -> Result<Representation> {
    let d = rep.dim();
    if k_new + 1 < d {
        return Err(Error::Dimension {
            expected: d,
            got: k_new + 1,
        });
    }
    let pad = |m: DMatrix<f64>| {
        let mut out = DMatrix::identity(k_new + 1, k_new + 1);
        out.view_mut((0, 0), (d, d)).copy_from(&m);
        out
    };
    rep.map_generators(format!("{}<H^{k_new}", rep.label()), |g| {
        ProjectiveMatrix::from_pair(pad(g.entries()), pad(g.inverse_entries()))
    })
}
