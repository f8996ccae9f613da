//! Hölder exponent of the limit map: an a priori bound from Jordan gaps and an
//! empirical lower-envelope fit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{limit_samples, LimitSample};
use crate::error::{Error, Result};
use crate::hypgeom::{translation_length, visual_distance, HypPoint};
use crate::reps::{exterior_power_rep, Representation};
use crate::spectral::{projective_distance, JordanEvaluator};
use crate::words::Word;

pub const MIN_PAIRS: usize = 100;
pub const MIN_BINS: usize = 3;
/// Minimum extent of `log2(1/delta)` covered by populated bins.
pub const MIN_SPAN: f64 = 2.0;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HolderBound {
    pub bound: f64,
    pub argmin: Word,
}

fn gap_bound<F>(geo: &Representation, lin: &Representation, words: &[Word], gap: F) -> Result<HolderBound>
where
    F: Fn(&[f64]) -> f64,
{
    if words.is_empty() {
        return Err(Error::InvalidArgument("no words".into()));
    }
    let je = JordanEvaluator::new(lin)?;
    let mut best = HolderBound {
        bound: f64::INFINITY,
        argmin: words[0].clone(),
    };
    for w in words {
        let ell = translation_length(&geo.evaluate(w)?)?;
        let j = je.jordan(w)?;
        let r = gap(j.values()) / ell;
        if r < best.bound {
            best = HolderBound {
                bound: r,
                argmin: w.clone(),
            };
        }
    }
    Ok(best)
}

/// `min_gamma min{(l1 - l2), (l_{d-1} - l_d)}(rho gamma) / |gamma|`.
pub fn holder_upper_bound(geo: &Representation, lin: &Representation, words: &[Word]) -> Result<HolderBound> {
    gap_bound(geo, lin, words, |l| {
        let d = l.len();
        (l[0] - l[1]).min(l[d - 2] - l[d - 1])
    })
}

/// Same ratio with every simple-root gap `l_i - l_{i+1}`.
pub fn flag_holder_upper_bound(geo: &Representation, lin: &Representation, words: &[Word]) -> Result<HolderBound> {
    gap_bound(geo, lin, words, |l| {
        l.windows(2).map(|p| p[0] - p[1]).fold(f64::INFINITY, f64::min)
    })
}

fn pair_indices(n: usize, max_pairs: usize, seed: u64) -> Vec<(usize, usize)> {
    let total = n * n.saturating_sub(1) / 2;
    if total <= max_pairs {
        return (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..max_pairs)
        .map(|_| {
            let i = rng.gen_range(0..n);
            let mut j = rng.gen_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            (i.min(j), i.max(j))
        })
        .collect()
}

/// `(delta_o(x, y), d_P(xi x, xi y))` over sample pairs, at most `max_pairs`.
pub fn holder_pairs(samples: &[LimitSample], max_pairs: usize, seed: u64) -> Vec<(f64, f64)> {
    let Some(first) = samples.first() else {
        return Vec::new();
    };
    let o = HypPoint::origin(first.base.coords().len() - 1);
    pair_indices(samples.len(), max_pairs, seed)
        .into_iter()
        .map(|(i, j)| {
            let (x, y) = (&samples[i], &samples[j]);
            (visual_distance(&x.base, &y.base, &o), projective_distance(&x.line, &y.line))
        })
        .collect()
}

/// Pairs for each exterior power `k = 1..d-1` on a common pair set, plus
/// the max over factors.
#[derive(Clone, Debug)]
pub struct FlagPairs {
    pub per_factor: Vec<Vec<(f64, f64)>>,
    pub max: Vec<(f64, f64)>,
}

pub fn flag_holder_pairs(
    geo: &Representation,
    lin: &Representation,
    words: &[Word],
    max_pairs: usize,
    seed: u64,
) -> Result<FlagPairs> {
    let d = lin.dim();
    let mut per_factor = Vec::with_capacity(d - 1);
    for k in 1..d {
        let rep = if k == 1 { lin.clone() } else { exterior_power_rep(lin, k)? };
        per_factor.push(holder_pairs(&limit_samples(geo, &rep, words)?, max_pairs, seed));
    }
    let max = (0..per_factor[0].len())
        .map(|i| {
            let delta = per_factor[0][i].0;
            (delta, per_factor.iter().map(|f| f[i].1).fold(0.0, f64::max))
        })
        .collect();
    Ok(FlagPairs { per_factor, max })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BinDiagnostic {
    /// Dyadic index `floor(log2(1/delta))`.
    pub bin: i64,
    pub count: usize,
    /// Lower-envelope point of the bin.
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HolderFit {
    pub alpha: f64,
    pub pairs: usize,
    pub span: f64,
    pub bins: Vec<BinDiagnostic>,
}

/// Largest slope of a line from the coarsest envelope point that stays below
/// the envelope on the far half of the range.
///
/// Coordinates are `x = log2(1/delta)`, `y = log2(1/d_P)`; an `alpha`-Hölder map
/// has `y >= alpha x - C`.
pub fn holder_exponent_fit(pairs: &[(f64, f64)]) -> Result<HolderFit> {
    let pts: Vec<(f64, f64)> = pairs
        .iter()
        .filter(|(a, b)| *a > 0.0 && *b > 0.0 && a.is_finite() && b.is_finite())
        .map(|(a, b)| (-a.log2(), -b.log2()))
        .collect();
    if pts.len() < MIN_PAIRS {
        return Err(Error::Degenerate(format!(
            "insufficient spread: {} usable pairs, need {MIN_PAIRS}",
            pts.len()
        )));
    }
    let mut bins: std::collections::BTreeMap<i64, BinDiagnostic> = Default::default();
    for &(x, y) in &pts {
        let k = x.floor() as i64;
        let e = bins.entry(k).or_insert(BinDiagnostic {
            bin: k,
            count: 0,
            x,
            y,
        });
        e.count += 1;
        if y < e.y {
            e.x = x;
            e.y = y;
        }
    }
    let bins: Vec<BinDiagnostic> = bins.into_values().collect();
    let span = bins.last().unwrap().x - bins[0].x;
    if bins.len() < MIN_BINS || span < MIN_SPAN {
        return Err(Error::Degenerate(format!(
            "insufficient spread: {} bins spanning {span:.3}",
            bins.len()
        )));
    }
    let r = &bins[0];
    let alpha = bins[1..]
        .iter()
        .filter(|b| b.x >= r.x + span / 2.0)
        .map(|b| (b.y - r.y) / (b.x - r.x))
        .fold(f64::INFINITY, f64::min);
    Ok(HolderFit {
        alpha,
        pairs: pts.len(),
        span,
        bins,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FlagHolderFit {
    pub alpha: f64,
    pub per_factor: Vec<f64>,
    pub combined: HolderFit,
}

impl FlagHolderFit {
    pub fn from_pairs(p: &FlagPairs) -> Result<Self> {
        let combined = holder_exponent_fit(&p.max)?;
        let per_factor = p
            .per_factor
            .iter()
            .map(|f| holder_exponent_fit(f).map(|h| h.alpha))
            .collect::<Result<Vec<_>>>()?;
        Ok(FlagHolderFit {
            alpha: combined.alpha,
            per_factor,
            combined,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reps::{klein_schottky, perturb, psl2_schottky, sym_power_rep, Axes, SchottkyParams};
    use crate::words::enumerate_conjugacy_classes;
    use approx::assert_relative_eq;

    fn params() -> SchottkyParams {
        SchottkyParams::new(2, 2, 2.0, Axes::Perpendicular, 0).unwrap()
    }

    #[test]
    fn synthetic_power_law() {
        let pairs: Vec<(f64, f64)> = (0..400).map(|i| {
            let d = 0.9 * 0.97f64.powi(i);
            (d, d.sqrt())
        }).collect();
        let fit = holder_exponent_fit(&pairs).unwrap();
        assert!((fit.alpha - 0.5).abs() < 0.02, "{}", fit.alpha);
        // a multiplicative constant does not move the slope
        let scaled: Vec<_> = pairs.iter().map(|(a, b)| (*a, 3.0 * b)).collect();
        assert_relative_eq!(holder_exponent_fit(&scaled).unwrap().alpha, fit.alpha, epsilon = 1e-12);
    }

    #[test]
    fn spread_is_required() {
        let few: Vec<(f64, f64)> = (0..50).map(|i| (0.5 / (i + 1) as f64, 0.1)).collect();
        assert!(holder_exponent_fit(&few).is_err());
        let narrow: Vec<(f64, f64)> = (0..200).map(|i| (0.3 + 1e-3 * i as f64, 0.1)).collect();
        assert!(holder_exponent_fit(&narrow).is_err());
    }

    #[test]
    fn klein_is_bi_lipschitz() {
        let (geo, _) = klein_schottky(&params()).unwrap();
        let words = enumerate_conjugacy_classes(2, 8).unwrap();
        let s = limit_samples(&geo, &geo, &words).unwrap();
        let pairs = holder_pairs(&s, 200_000, 1);
        for &(delta, dp) in &pairs {
            let r = dp / delta;
            assert!((1.0 - 1e-9..=2f64.sqrt() + 1e-9).contains(&r), "{r}");
        }
        let fit = holder_exponent_fit(&pairs).unwrap();
        assert!((0.9..=1.1).contains(&fit.alpha), "{}", fit.alpha);
        let b = holder_upper_bound(&geo, &geo, &words).unwrap();
        assert_relative_eq!(b.bound, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn fuchsian_bounds() {
        let p = params();
        let (r2, _) = psl2_schottky(&p).unwrap();
        let (geo, _) = klein_schottky(&p).unwrap();
        let words = enumerate_conjugacy_classes(2, 7).unwrap();
        for d in [3, 4] {
            let lin = sym_power_rep(&r2, d).unwrap();
            let b = holder_upper_bound(&geo, &lin, &words).unwrap();
            assert_relative_eq!(b.bound, 1.0, epsilon = 1e-8);
            let fb = flag_holder_upper_bound(&geo, &lin, &words).unwrap();
            assert_relative_eq!(fb.bound, 1.0, epsilon = 1e-8);
            let s = limit_samples(&geo, &lin, &words).unwrap();
            let fit = holder_exponent_fit(&holder_pairs(&s, 100_000, 2)).unwrap();
            assert!(fit.alpha <= b.bound * 1.15, "{}", fit.alpha);
            let flag = FlagHolderFit::from_pairs(&flag_holder_pairs(&geo, &lin, &words, 50_000, 2).unwrap()).unwrap();
            assert_eq!(flag.per_factor.len(), d - 1);
            assert!(flag.alpha <= fb.bound * 1.15);
        }
    }

    #[test]
    fn perturbed_bound_is_stable() {
        let p = params();
        let (r2, _) = psl2_schottky(&p).unwrap();
        let (geo, _) = klein_schottky(&p).unwrap();
        let lin = perturb(&sym_power_rep(&r2, 4).unwrap(), 0.05, 3).unwrap();
        let b6 = holder_upper_bound(&geo, &lin, &enumerate_conjugacy_classes(2, 6).unwrap()).unwrap();
        let b8 = holder_upper_bound(&geo, &lin, &enumerate_conjugacy_classes(2, 8).unwrap()).unwrap();
        assert!(b8.bound > 0.0 && b8.bound <= b6.bound);
        assert!((b6.bound - b8.bound) / b6.bound < 0.1, "{} {}", b6.bound, b8.bound);
    }
}
