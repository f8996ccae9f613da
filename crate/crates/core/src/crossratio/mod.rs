//! Limit maps sampled at fixed points, cocycles, and cross ratios.

mod axioms;
mod holder;

pub use axioms::{
    axiom_check, chi_p_det, rank_estimate, AxiomReport, AxiomResult, ChiP, RankEstimate, AXIOM_NAMES,
};
pub use holder::{
    flag_holder_pairs, flag_holder_upper_bound, holder_exponent_fit, holder_pairs, holder_upper_bound,
    BinDiagnostic, FlagHolderFit, HolderBound, HolderFit,
};

use std::io::Write;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypgeom::{boundary_fixed_points, BoundaryPoint};
use crate::reps::{AdjointRep, ProjectiveMatrix, Representation};
use crate::spectral::{lambda1, proximality_data, PROXIMAL_TOL};
use crate::words::Word;

/// Base points closer than this (chord of unit directions) are merged.
pub const DEDUP_TOL: f64 = 1e-10;

/// `(gamma+, xi(gamma+), xi*(gamma+))` for one group element.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LimitSample {
    pub word: Word,
    pub base: BoundaryPoint,
    pub line: DVector<f64>,
    pub covector: DVector<f64>,
}

impl LimitSample {
    /// The sample moved by `gamma`: base, line and covector all transported.
    pub fn translate(&self, geo: &Representation, lin: &Representation, gamma: &Word) -> Result<LimitSample> {
        self.translate_by(&geo.evaluate(gamma)?, &lin.evaluate(gamma)?)
    }

    /// [`LimitSample::translate`] with the images already evaluated.
    pub fn translate_by(&self, g_geo: &ProjectiveMatrix, g_lin: &ProjectiveMatrix) -> Result<LimitSample> {
        let (f, _) = g_lin.scaled();
        let (b, _) = g_lin.scaled_inverse();
        let line = f * &self.line;
        let covector = b.transpose() * &self.covector;
        Ok(LimitSample {
            word: self.word.clone(),
            base: self.base.apply(g_geo.scaled().0)?,
            line: &line / line.norm(),
            covector: &covector / covector.norm(),
        })
    }

    /// Same base point, line and covector pushed through the adjoint construction.
    pub fn adjoint(&self, ad: &AdjointRep) -> LimitSample {
        let line = ad.line(&self.line, &self.covector);
        let cov = ad.covector(&self.line, &self.covector);
        LimitSample {
            word: self.word.clone(),
            base: self.base.clone(),
            line: &line / line.norm(),
            covector: &cov / cov.norm(),
        }
    }
}

fn sample_for(geo: &Representation, lin: &Representation, w: &Word) -> Result<LimitSample> {
    let (base, _) = boundary_fixed_points(&geo.evaluate(w)?)?;
    let l = lin.evaluate(w)?;
    let p = proximality_data(&l, PROXIMAL_TOL)?.ok_or_else(|| Error::not_proximal(w))?;
    let q = proximality_data(&l.inverse(), PROXIMAL_TOL)?.ok_or_else(|| Error::not_proximal(w))?;
    Ok(LimitSample {
        word: w.clone(),
        base,
        line: p.attracting_line,
        covector: q.repelling_covector,
    })
}

/// Samples of the limit maps at attracting fixed points, first occurrence
/// kept when base points coincide.
pub fn limit_samples(geo: &Representation, lin: &Representation, words: &[Word]) -> Result<Vec<LimitSample>> {
    if geo.rank() != lin.rank() {
        return Err(Error::InvalidArgument(format!(
            "geometric rank {} differs from linear rank {}",
            geo.rank(),
            lin.rank()
        )));
    }
    let all = words
        .par_iter()
        .map(|w| sample_for(geo, lin, w))
        .collect::<Result<Vec<_>>>()?;
    Ok(dedup(all))
}

fn dedup(all: Vec<LimitSample>) -> Vec<LimitSample> {
    // bucket by the first direction coordinate to keep this near-linear
    let mut order: Vec<usize> = (0..all.len()).collect();
    order.sort_by(|&a, &b| all[a].base.coords()[1].total_cmp(&all[b].base.coords()[1]));
    let mut drop = vec![false; all.len()];
    for (pos, &i) in order.iter().enumerate() {
        if drop[i] {
            continue;
        }
        for &j in &order[pos + 1..] {
            if all[j].base.coords()[1] - all[i].base.coords()[1] > DEDUP_TOL {
                break;
            }
            if all[i].base.chord(&all[j].base) <= DEDUP_TOL {
                // keep the earlier word
                if j > i {
                    drop[j] = true;
                } else {
                    drop[i] = true;
                }
            }
        }
    }
    all.into_iter().zip(drop).filter(|(_, d)| !d).map(|(s, _)| s).collect()
}

/// `beta(gamma, x) = log |rho(gamma) v| / |v|`.
pub fn cocycle_beta(lin: &Representation, gamma: &Word, s: &LimitSample) -> Result<f64> {
    Ok(beta(&lin.evaluate(gamma)?, s))
}

/// `beta_bar(gamma, x) = log |theta o rho(gamma^{-1})| / |theta|`.
pub fn cocycle_beta_bar(lin: &Representation, gamma: &Word, s: &LimitSample) -> Result<f64> {
    Ok(beta_bar(&lin.evaluate(gamma)?, s))
}

/// [`cocycle_beta`] for an evaluated image.
pub fn beta(m: &ProjectiveMatrix, s: &LimitSample) -> f64 {
    let (f, fs) = m.scaled();
    (f * &s.line).norm().ln() + fs - s.line.norm().ln()
}

/// [`cocycle_beta_bar`] for an evaluated image.
pub fn beta_bar(m: &ProjectiveMatrix, s: &LimitSample) -> f64 {
    let (b, bs) = m.scaled_inverse();
    (b.transpose() * &s.covector).norm().ln() + bs - s.covector.norm().ln()
}

/// `log |theta(v)| / (|theta| |v|)`; `-inf` when `theta(v) = 0`.
pub fn gromov_g(theta: &DVector<f64>, v: &DVector<f64>) -> f64 {
    (theta.dot(v).abs() / (theta.norm() * v.norm())).ln()
}

/// `[x, y] = G(xi*(x), xi(y))`.
pub fn gromov_bracket(x: &LimitSample, y: &LimitSample) -> f64 {
    gromov_g(&x.covector, &y.line)
}

/// Four samples with `x != t` and `y != z` as base points.
#[derive(Clone, Copy, Debug)]
pub struct FourTuple<'a> {
    pub x: &'a LimitSample,
    pub y: &'a LimitSample,
    pub z: &'a LimitSample,
    pub t: &'a LimitSample,
}

impl<'a> FourTuple<'a> {
    pub fn new(x: &'a LimitSample, y: &'a LimitSample, z: &'a LimitSample, t: &'a LimitSample) -> Result<Self> {
        if x.base.chord(&t.base) <= DEDUP_TOL || y.base.chord(&z.base) <= DEDUP_TOL {
            return Err(Error::Degenerate("cross ratio needs x != t and y != z".into()));
        }
        Ok(FourTuple { x, y, z, t })
    }
}

/// `b(x,y,z,t) = phi(u)/psi(u) * psi(v)/phi(v)` with `phi = xi*(x)`,
/// `psi = xi*(z)`, `u = xi(y)`, `v = xi(t)`.
pub fn cross_ratio(t: &FourTuple) -> Result<f64> {
    let (phi, psi) = (&t.x.covector, &t.z.covector);
    let (u, v) = (&t.y.line, &t.t.line);
    let (psi_u, phi_v) = (psi.dot(u), phi.dot(v));
    if psi_u == 0.0 || phi_v == 0.0 {
        return Err(Error::Degenerate("transversality fails on this tuple".into()));
    }
    Ok(phi.dot(u) / psi_u * (psi.dot(v) / phi_v))
}

/// `exp([x,y] - [z,y] + [z,t] - [x,t])`.
pub fn cross_ratio_from_gromov(t: &FourTuple) -> Result<f64> {
    let (zy, xt) = (gromov_bracket(t.z, t.y), gromov_bracket(t.x, t.t));
    if !zy.is_finite() || !xt.is_finite() {
        return Err(Error::Degenerate("transversality fails on this tuple".into()));
    }
    Ok((gromov_bracket(t.x, t.y) - zy + gromov_bracket(t.z, t.t) - xt).exp())
}

/// Any four-point function on samples, e.g. [`cross_ratio`] or a power of it.
pub trait CrossRatioFn: Sync {
    fn eval(&self, x: &LimitSample, y: &LimitSample, z: &LimitSample, t: &LimitSample) -> Result<f64>;
}

impl<F> CrossRatioFn for F
where
    F: Fn(&LimitSample, &LimitSample, &LimitSample, &LimitSample) -> Result<f64> + Sync,
{
    fn eval(&self, x: &LimitSample, y: &LimitSample, z: &LimitSample, t: &LimitSample) -> Result<f64> {
        self(x, y, z, t)
    }
}

/// The projective cross ratio as a [`CrossRatioFn`].
pub fn projective(x: &LimitSample, y: &LimitSample, z: &LimitSample, t: &LimitSample) -> Result<f64> {
    cross_ratio(&FourTuple::new(x, y, z, t)?)
}

/// `count` index tuples of pairwise distinct samples whose base points are at
/// least `min_chord` apart.
pub fn sample_tuples<const N: usize>(
    samples: &[LimitSample],
    count: usize,
    min_chord: f64,
    seed: u64,
) -> Result<Vec<[usize; N]>> {
    if samples.len() < N {
        return Err(Error::InvalidArgument(format!(
            "need at least {N} samples, have {}",
            samples.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut failures = 0usize;
    while out.len() < count {
        // greedy fill: accept random candidates far from those already chosen
        let mut t = [0usize; N];
        let mut filled = 0;
        for _ in 0..20 * N {
            let c = rng.gen_range(0..samples.len());
            if t[..filled]
                .iter()
                .all(|&i| i != c && samples[i].base.chord(&samples[c].base) >= min_chord)
            {
                t[filled] = c;
                filled += 1;
                if filled == N {
                    break;
                }
            }
        }
        if filled == N {
            out.push(t);
        } else {
            failures += 1;
            if failures > 100 + 10 * count {
                return Err(Error::Degenerate(format!(
                    "cannot find {count} tuples of {N} points with separation {min_chord}"
                )));
            }
        }
    }
    Ok(out)
}

/// CSV with columns `word, base_*, line_*, covector_*`.
pub fn write_samples_csv<W: Write>(samples: &[LimitSample], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if let Some(s) = samples.first() {
        let mut header = vec!["word".to_string()];
        header.extend((0..s.base.coords().len()).map(|i| format!("base_{i}")));
        header.extend((0..s.line.len()).map(|i| format!("line_{i}")));
        header.extend((0..s.covector.len()).map(|i| format!("covector_{i}")));
        w.write_record(&header)?;
    }
    for s in samples {
        let mut rec = vec![s.word.to_string()];
        rec.extend(s.base.coords().iter().map(|x| format!("{x:e}")));
        rec.extend(s.line.iter().map(|x| format!("{x:e}")));
        rec.extend(s.covector.iter().map(|x| format!("{x:e}")));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// One step of the exponential-of-periods experiment.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenoistStep {
    pub n: usize,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenoistExperiment {
    pub gamma: Word,
    pub h: Word,
    pub steps: Vec<BenoistStep>,
    /// `|b|(gamma-, h+, h-, gamma+)`.
    pub target: f64,
}

/// `exp{lambda_1(gamma^n h^n) - lambda_1(gamma^n) - lambda_1(h^n)}` for
/// `n = 1..=n_max`, next to the cross ratio it is conjectured to approach.
pub fn benoist_experiment(
    geo: &Representation,
    lin: &Representation,
    gamma: &Word,
    h: &Word,
    n_max: usize,
) -> Result<BenoistExperiment> {
    let s = |w: &Word| sample_for(geo, lin, w);
    let (gp, gm) = (s(gamma)?, s(&gamma.inverse())?);
    let (hp, hm) = (s(h)?, s(&h.inverse())?);
    let target = cross_ratio(&FourTuple::new(&gm, &hp, &hm, &gp)?)?.abs();
    let mut steps = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let (gn, hn) = (gamma.power(n), h.power(n));
        let prod = gn.mul(&hn)?;
        let v = lambda1(&lin.evaluate(&prod)?)? - lambda1(&lin.evaluate(&gn)?)? - lambda1(&lin.evaluate(&hn)?)?;
        steps.push(BenoistStep { n, value: v.exp() });
    }
    Ok(BenoistExperiment {
        gamma: gamma.clone(),
        h: h.clone(),
        steps,
        target,
    })
}
