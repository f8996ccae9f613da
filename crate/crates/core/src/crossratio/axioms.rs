use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{sample_tuples, CrossRatioFn, LimitSample};
use crate::error::{Error, Result};

pub const AXIOM_NAMES: [&str; 5] = ["symmetry", "normalization", "vanishing", "cocycle_right", "cocycle_left"];

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AxiomResult {
    pub name: String,
    pub max_violation: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AxiomReport {
    pub tuples: usize,
    pub tol: f64,
    pub axioms: Vec<AxiomResult>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.axioms.iter().all(|a| a.passed)
    }

    pub fn get(&self, name: &str) -> Option<&AxiomResult> {
        self.axioms.iter().find(|a| a.name == name)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

/// Max relative violation of each cross-ratio axiom over five-point tuples
/// `(x, y, z, t, w)` of pairwise distinct samples.
pub fn axiom_check<B: CrossRatioFn + ?Sized>(
    b: &B,
    samples: &[LimitSample],
    tuples: &[[usize; 5]],
    tol: f64,
) -> Result<AxiomReport> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tol must be positive".into()));
    }
    let mut worst = [0.0f64; 5];
    for t in tuples {
        let [x, y, z, u, w] = t.map(|i| &samples[i]);
        let bxyzt = b.eval(x, y, z, u)?;
        worst[0] = worst[0].max(rel(bxyzt, b.eval(z, u, x, y)?));
        worst[1] = worst[1]
            .max((b.eval(x, y, x, u)? - 1.0).abs())
            .max((b.eval(x, y, z, y)? - 1.0).abs());
        // zero exactly on the diagonal, and never on distinct points
        let v = b.eval(x, x, z, u)?.abs().max(b.eval(x, y, z, z)?.abs());
        worst[2] = worst[2].max(if bxyzt == 0.0 { f64::INFINITY } else { v });
        worst[3] = worst[3].max(rel(bxyzt, b.eval(x, y, z, w)? * b.eval(x, w, z, u)?));
        worst[4] = worst[4].max(rel(bxyzt, b.eval(x, y, w, u)? * b.eval(w, y, z, u)?));
    }
    Ok(AxiomReport {
        tuples: tuples.len(),
        tol,
        axioms: AXIOM_NAMES
            .iter()
            .zip(worst)
            .map(|(n, v)| AxiomResult {
                name: n.to_string(),
                max_violation: v,
                passed: v <= tol,
            })
            .collect(),
    })
}

/// `det(b(e_i, u_j, e_0, u_0))_{i,j >= 1}` with the product of row sup-norms.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ChiP {
    pub det: f64,
    pub scale: f64,
}

impl ChiP {
    pub fn vanishes(&self, tol: f64) -> bool {
        self.det.abs() <= tol * self.scale
    }
}

pub fn chi_p_det<B: CrossRatioFn + ?Sized>(b: &B, e: &[&LimitSample], u: &[&LimitSample]) -> Result<ChiP> {
    if e.len() != u.len() || e.len() < 2 {
        return Err(Error::InvalidArgument("chi_p needs p+1 >= 2 samples on each side".into()));
    }
    let p = e.len() - 1;
    let mut m = DMatrix::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            m[(i, j)] = b.eval(e[i + 1], u[j + 1], e[0], u[0])?;
        }
    }
    let scale = m
        .row_iter()
        .map(|r| r.iter().fold(0.0f64, |a, x| a.max(x.abs())))
        .product();
    Ok(ChiP {
        det: m.lu().determinant(),
        scale,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "value", rename_all = "snake_case")]
pub enum RankEstimate {
    Rank(usize),
    /// No `p <= p_max` collapsed, so the rank is at least `p_max`.
    AtLeast(usize),
}

impl std::fmt::Display for RankEstimate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RankEstimate::Rank(r) => write!(f, "{r}"),
            RankEstimate::AtLeast(p) => write!(f, ">= {p}"),
        }
    }
}

/// Smallest `p` with every sampled `chi^p` negligible, minus one.
pub fn rank_estimate<B: CrossRatioFn + ?Sized>(
    b: &B,
    samples: &[LimitSample],
    p_max: usize,
    trials: usize,
    tol: f64,
    min_chord: f64,
    seed: u64,
) -> Result<RankEstimate> {
    if samples.len() < 2 * (p_max + 1) {
        return Err(Error::InvalidArgument(format!(
            "rank up to p = {p_max} needs {} samples, have {}",
            2 * (p_max + 1),
            samples.len()
        )));
    }
    for p in 1..=p_max {
        let n = 2 * (p + 1);
        let idx = sample_indices(samples, n, trials, min_chord, seed.wrapping_add(p as u64))?;
        let mut collapsed = true;
        for t in &idx {
            let e: Vec<&LimitSample> = t[..p + 1].iter().map(|&i| &samples[i]).collect();
            let u: Vec<&LimitSample> = t[p + 1..].iter().map(|&i| &samples[i]).collect();
            if !chi_p_det(b, &e, &u)?.vanishes(tol) {
                collapsed = false;
                break;
            }
        }
        if collapsed {
            return Ok(RankEstimate::Rank(p - 1));
        }
    }
    Ok(RankEstimate::AtLeast(p_max))
}

fn sample_indices(
    samples: &[LimitSample],
    n: usize,
    trials: usize,
    min_chord: f64,
    seed: u64,
) -> Result<Vec<Vec<usize>>> {
    macro_rules! arm {
        ($($k:literal),*) => {
            match n {
                $($k => Ok(sample_tuples::<$k>(samples, trials, min_chord, seed)?
                    .into_iter()
                    .map(|a| a.to_vec())
                    .collect()),)*
                _ => Err(Error::InvalidArgument(format!("p_max too large for {n} points"))),
            }
        };
    }
    arm!(4, 6, 8, 10, 12, 14, 16, 18, 20, 22, 24)
}
