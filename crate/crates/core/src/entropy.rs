//! Period spectra over conjugacy classes and their exponential growth rates.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypgeom::translation_length;
use crate::reps::Representation;
use crate::spectral::{lambda1, JordanEvaluator, JordanVector};
use crate::words::{enumerate_conjugacy_classes, Word};

pub const MIN_VALUES: usize = 50;
/// Sorted values closer than this (relative) count as one level of `N(t)`.
pub const TIE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Functional {
    /// `lambda_1`.
    Spectral,
    /// `(lambda_1 - lambda_d) / 2`.
    Hilbert,
    /// `sum_i c_i lambda_i`.
    Weight { coefficients: Vec<f64> },
    /// Hyperbolic translation length of a Klein-model image.
    TranslationLength,
}

impl Functional {
    pub fn label(&self) -> String {
        match self {
            Functional::Spectral => "lambda1".into(),
            Functional::Hilbert => "hilbert".into(),
            Functional::Weight { coefficients } => {
                let c: Vec<String> = coefficients.iter().map(|x| x.to_string()).collect();
                format!("weight[{}]", c.join(","))
            }
            Functional::TranslationLength => "translation_length".into(),
        }
    }

    pub fn on_jordan(&self, j: &JordanVector) -> Result<f64> {
        Ok(match self {
            Functional::Spectral => j.lambda1(),
            Functional::Hilbert => (j.lambda1() - j.lambda_d()) / 2.0,
            Functional::Weight { coefficients } => {
                if coefficients.len() != j.dim() {
                    return Err(Error::Dimension {
                        expected: j.dim(),
                        got: coefficients.len(),
                    });
                }
                coefficients.iter().zip(j.values()).map(|(c, l)| c * l).sum()
            }
            Functional::TranslationLength => {
                return Err(Error::InvalidArgument("translation length needs the matrix".into()))
            }
        })
    }
}

/// One value per conjugacy class, sorted nondecreasing.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PeriodSpectrum {
    pub words: Vec<Word>,
    pub values: Vec<f64>,
    pub functional_label: String,
    pub max_len: usize,
}

impl PeriodSpectrum {
    /// Sorts `(word, value)` pairs by value, then by enumeration order.
    pub fn new(entries: Vec<(Word, f64)>, functional_label: impl Into<String>, max_len: usize) -> Result<Self> {
        if let Some((w, v)) = entries.iter().find(|(_, v)| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::NonPositivePeriod {
                word: w.to_string(),
                value: *v,
            });
        }
        let mut entries = entries;
        entries.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (words, values) = entries.into_iter().unzip();
        Ok(PeriodSpectrum {
            words,
            values,
            functional_label: functional_label.into(),
            max_len,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        PeriodSpectrum::new(
            self.words.iter().cloned().zip(self.values.iter().map(|v| c * v)).collect(),
            format!("{}*{c}", self.functional_label),
            self.max_len,
        )
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["word", "value"])?;
        for (word, v) in self.words.iter().zip(&self.values) {
            w.write_record([word.to_string(), format!("{v:e}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Spectrum of `functional` over all conjugacy classes up to `max_len`.
pub fn period_spectrum(rep: &Representation, functional: &Functional, max_len: usize) -> Result<PeriodSpectrum> {
    let words = enumerate_conjugacy_classes(rep.rank(), max_len)?;
    period_spectrum_of(rep, functional, &words, max_len)
}

pub fn period_spectrum_of(
    rep: &Representation,
    functional: &Functional,
    words: &[Word],
    max_len: usize,
) -> Result<PeriodSpectrum> {
    let entries: Vec<(Word, f64)> = match functional {
        Functional::TranslationLength => words
            .par_iter()
            .map(|w| Ok((w.clone(), translation_length(&rep.evaluate(w)?)?)))
            .collect::<Result<_>>()?,
        // top eigenvalues of rho(w) and rho(w)^{-1} suffice
        Functional::Spectral | Functional::Hilbert => words
            .par_iter()
            .map(|w| {
                let m = rep.evaluate(w)?;
                let l1 = lambda1(&m)?;
                let v = if *functional == Functional::Spectral {
                    l1
                } else {
                    0.5 * (l1 + lambda1(&m.inverse())?)
                };
                Ok((w.clone(), v))
            })
            .collect::<Result<_>>()?,
        f => {
            let je = JordanEvaluator::new(rep)?;
            words
                .par_iter()
                .map(|w| Ok((w.clone(), f.on_jordan(&je.jordan(w)?)?)))
                .collect::<Result<_>>()?
        }
    };
    PeriodSpectrum::new(entries, functional.label(), max_len)
}

/// Inter-quantile window on the sorted spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowPolicy {
    pub lo: f64,
    pub hi: f64,
}

impl Default for WindowPolicy {
    fn default() -> Self {
        WindowPolicy { lo: 0.25, hi: 0.95 }
    }
}

impl WindowPolicy {
    fn indices(&self, n: usize) -> Result<(usize, usize)> {
        if !(0.0 <= self.lo && self.lo < self.hi && self.hi <= 1.0) {
            return Err(Error::InvalidArgument(format!("bad window [{}, {}]", self.lo, self.hi)));
        }
        let at = |q: f64| ((q * (n - 1) as f64).floor() as usize).min(n - 1);
        Ok((at(self.lo), at(self.hi)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthEstimate {
    pub h: f64,
    pub window: (f64, f64),
    pub residual: f64,
    #[serde(rename = "count")]
    pub count_at_hi: usize,
}

fn tied(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_TOL * a.abs().max(b.abs())
}

/// Least-squares slope of `log N(t)` against `t` at the sorted values with
/// indices in `[i_lo, i_hi]`, one point per level of `N`.
fn fit_indices(values: &[f64], i_lo: usize, i_hi: usize) -> Result<GrowthEstimate> {
    let n = values.len();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for k in i_lo..=i_hi {
        // N(t_k) counts the whole tie group
        if k + 1 < n && tied(values[k], values[k + 1]) {
            continue;
        }
        xs.push(values[k]);
        ys.push(((k + 1) as f64).ln());
    }
    if xs.len() < 2 || tied(xs[0], xs[xs.len() - 1]) {
        return Err(Error::Degenerate(format!(
            "window [{:e}, {:e}] has {} distinct levels",
            values[i_lo],
            values[i_hi],
            xs.len()
        )));
    }
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let h = sxy / sxx;
    let residual = (xs.iter().zip(&ys).map(|(x, y)| (y - my - h * (x - mx)).powi(2)).sum::<f64>() / m).sqrt();
    let mut hi = i_hi;
    while hi + 1 < n && tied(values[hi], values[hi + 1]) {
        hi += 1;
    }
    Ok(GrowthEstimate {
        h,
        window: (values[i_lo], values[i_hi]),
        residual,
        count_at_hi: hi + 1,
    })
}

pub fn growth_rate(ps: &PeriodSpectrum, window: &WindowPolicy) -> Result<GrowthEstimate> {
    growth_rate_values(&ps.values, window)
}

/// [`growth_rate`] on raw sorted values.
pub fn growth_rate_values(values: &[f64], window: &WindowPolicy) -> Result<GrowthEstimate> {
    if values.len() < MIN_VALUES {
        return Err(Error::Degenerate(format!(
            "{} values, need at least {MIN_VALUES}",
            values.len()
        )));
    }
    let (lo, hi) = window.indices(values.len())?;
    fit_indices(values, lo, hi)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EntropyRatio {
    pub ratio: f64,
    pub numerator: GrowthEstimate,
    pub denominator: GrowthEstimate,
}

/// `h(a) / h(b)` with the same index window in both spectra.
pub fn entropy_ratio(a: &PeriodSpectrum, b: &PeriodSpectrum, window: &WindowPolicy) -> Result<EntropyRatio> {
    let mut wa: Vec<&Word> = a.words.iter().collect();
    let mut wb: Vec<&Word> = b.words.iter().collect();
    wa.sort();
    wb.sort();
    if wa != wb {
        return Err(Error::InvalidArgument("spectra are over different class lists".into()));
    }
    if a.len() < MIN_VALUES {
        return Err(Error::Degenerate(format!("{} values, need at least {MIN_VALUES}", a.len())));
    }
    let (lo, hi) = window.indices(a.len())?;
    let numerator = fit_indices(&a.values, lo, hi)?;
    let denominator = fit_indices(&b.values, lo, hi)?;
    Ok(EntropyRatio {
        ratio: numerator.h / denominator.h,
        numerator,
        denominator,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reps::{klein_schottky, psl2_schottky, sym_power_rep, Axes, ProjectiveMatrix, SchottkyParams};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn fake(values: &[f64]) -> PeriodSpectrum {
        let words = enumerate_conjugacy_classes(3, 6).unwrap();
        PeriodSpectrum::new(words.into_iter().zip(values.iter().copied()).collect(), "test", 6).unwrap()
    }

    #[test]
    fn log_counting_has_unit_rate() {
        let t: Vec<f64> = (1..=10_000).map(|k| (k as f64).ln()).collect();
        let g = growth_rate_values(&t, &WindowPolicy::default()).unwrap();
        assert!((g.h - 1.0).abs() < 0.01, "{}", g.h);
        assert!(g.residual < 1e-9);
        assert!(g.window.0 < g.window.1);
    }

    #[test]
    fn too_few_values() {
        assert!(growth_rate_values(&[1.0; 10], &WindowPolicy::default()).is_err());
        assert!(growth_rate_values(&[1.0; 100], &WindowPolicy::default()).is_err());
        let t: Vec<f64> = (1..=100).map(|k| k as f64).collect();
        assert!(growth_rate_values(&t, &WindowPolicy { lo: 0.9, hi: 0.2 }).is_err());
    }

    #[test]
    fn klein_spectra() {
        let p = SchottkyParams::new(2, 2, 2.0, Axes::Perpendicular, 0).unwrap();
        let (geo, _) = klein_schottky(&p).unwrap();
        let tl = period_spectrum(&geo, &Functional::TranslationLength, 7).unwrap();
        let l1 = period_spectrum(&geo, &Functional::Spectral, 7).unwrap();
        for (a, b) in tl.values.iter().zip(&l1.values) {
            assert_relative_eq!(a, b, max_relative = 1e-9);
        }
        let hil = period_spectrum(&geo, &Functional::Hilbert, 7).unwrap();
        let r = entropy_ratio(&hil, &tl, &WindowPolicy::default()).unwrap();
        assert_relative_eq!(r.ratio, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn fuchsian_ratio() {
        let p = SchottkyParams::new(2, 2, 2.0, Axes::Perpendicular, 0).unwrap();
        let (r2, _) = psl2_schottky(&p).unwrap();
        let (geo, _) = klein_schottky(&p).unwrap();
        let base = period_spectrum(&geo, &Functional::TranslationLength, 7).unwrap();
        for d in 3..=5 {
            let lin = sym_power_rep(&r2, d).unwrap();
            let s = period_spectrum(&lin, &Functional::Spectral, 7).unwrap();
            let h = period_spectrum(&lin, &Functional::Hilbert, 7).unwrap();
            let c = (d - 1) as f64 / 2.0;
            for ((a, b), e) in s.values.iter().zip(&base.values).zip(&h.values) {
                assert_relative_eq!(*a, c * b, max_relative = 1e-9);
                assert_relative_eq!(a, e, max_relative = 1e-9);
            }
            let r = entropy_ratio(&s, &base, &WindowPolicy::default()).unwrap();
            assert_relative_eq!(r.ratio, 2.0 / (d - 1) as f64, max_relative = 1e-9);
        }
    }

    #[test]
    fn separation_lowers_entropy() {
        let h = |len: f64| {
            let p = SchottkyParams::new(2, 2, len, Axes::Perpendicular, 0).unwrap();
            let (geo, _) = klein_schottky(&p).unwrap();
            growth_rate(&period_spectrum(&geo, &Functional::TranslationLength, 8).unwrap(), &WindowPolicy::default())
                .unwrap()
                .h
        };
        assert!(h(4.0) < h(2.0));
    }

    #[test]
    fn conjugation_invariance() {
        let p = SchottkyParams::new(2, 2, 2.0, Axes::Perpendicular, 0).unwrap();
        let (r2, _) = psl2_schottky(&p).unwrap();
        let lin = sym_power_rep(&r2, 3).unwrap();
        let g = ProjectiveMatrix::new(nalgebra::DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0])).unwrap();
        let a = period_spectrum(&lin, &Functional::Spectral, 6).unwrap();
        let b = period_spectrum(&lin.conjugate_by(&g).unwrap(), &Functional::Spectral, 6).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert_relative_eq!(x, y, max_relative = 1e-9);
        }
    }

    #[test]
    fn nonpositive_values_abort() {
        let words = enumerate_conjugacy_classes(2, 2).unwrap();
        let e = PeriodSpectrum::new(vec![(words[0].clone(), 1.0), (words[1].clone(), -0.5)], "x", 2);
        assert!(matches!(e, Err(Error::NonPositivePeriod { .. })));
        let p = SchottkyParams::new(2, 2, 2.0, Axes::Perpendicular, 0).unwrap();
        let (geo, _) = klein_schottky(&p).unwrap();
        // -lambda_1 is negative on every loxodromic class
        let f = Functional::Weight { coefficients: vec![-1.0, 0.0, 0.0] };
        assert!(matches!(period_spectrum(&geo, &f, 3), Err(Error::NonPositivePeriod { .. })));
    }

    #[test]
    fn mismatched_lists() {
        let a = fake(&(1..=200).map(|k| k as f64).collect::<Vec<_>>());
        let mut b = a.clone();
        b.words.pop();
        b.values.pop();
        assert!(entropy_ratio(&a, &b, &WindowPolicy::default()).is_err());
        assert_relative_eq!(entropy_ratio(&a, &a, &WindowPolicy::default()).unwrap().ratio, 1.0);
    }

    #[test]
    fn csv_and_json() {
        let a = fake(&(1..=60).map(|k| (k as f64).sqrt()).collect::<Vec<_>>());
        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("word,value\na,1e0\n"));
        let g = growth_rate(&a, &WindowPolicy::default()).unwrap();
        let v: serde_json::Value = serde_json::to_value(&g).unwrap();
        let mut keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        keys.sort();
        assert_eq!(keys, ["count", "h", "residual", "window"]);
    }

    proptest! {
        #[test]
        fn scaling(c in 0.05f64..20.0, seed in 0u64..100) {
            let vals: Vec<f64> = (1..=300).map(|k| (k as f64).ln() + 1.0 + ((k * 7919 + seed as usize) % 13) as f64 * 0.01).collect();
            let a = fake(&vals);
            let b = a.scaled(c).unwrap();
            let ga = growth_rate(&a, &WindowPolicy::default()).unwrap();
            let gb = growth_rate(&b, &WindowPolicy::default()).unwrap();
            prop_assert!((gb.h - ga.h / c).abs() <= 1e-9 * ga.h / c);
            let r = entropy_ratio(&b, &a, &WindowPolicy::default()).unwrap();
            prop_assert!((r.ratio - 1.0 / c).abs() <= 1e-9 / c);
        }
    }
}
