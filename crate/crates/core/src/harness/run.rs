use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::time::Instant;

use nalgebra::DMatrix;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{Built, ExperimentConfig};
use super::report::*;
use crate::crossratio::{
    axiom_check, benoist_experiment, beta, beta_bar, cross_ratio, cross_ratio_from_gromov, flag_holder_pairs,
    flag_holder_upper_bound, gromov_bracket, holder_exponent_fit, holder_pairs, holder_upper_bound, limit_samples,
    projective, rank_estimate, sample_tuples, write_samples_csv, FlagHolderFit, FourTuple, LimitSample,
    RankEstimate,
};
use crate::entropy::{entropy_ratio, growth_rate, period_spectrum_of, Functional, PeriodSpectrum};
use crate::error::{Error, Result};
use crate::hypgeom::translation_length;
use crate::reps::{adjoint_irreducible, Representation};
use crate::spectral::{lambda1, proximality_data, JordanEvaluator, PROXIMAL_TOL};
use crate::weyl::{barycenter, format_vector, ratio_bound, root_system, WeylKind};
use crate::words::{enumerate_conjugacy_classes, Letter, Word};

/// Relative singular-value cutoff for the span of sampled lines.
const SPAN_TOL: f64 = 1e-8;

struct Ctx {
    report: RunReport,
}

impl Ctx {
    fn stage<T>(&mut self, name: &str, f: impl FnOnce() -> Result<T>) -> Option<T> {
        let t0 = Instant::now();
        let out = f();
        self.report.timings.insert(name.to_string(), t0.elapsed().as_secs_f64());
        match out {
            Ok(v) => Some(v),
            Err(e) => {
                self.report.errors.push(StageError {
                    stage: name.to_string(),
                    message: e.to_string(),
                });
                None
            }
        }
    }

    fn ledger(&mut self, id: &str, entry: LedgerEntry) {
        self.report.ledger.insert(id.to_string(), entry);
    }

    /// Records `entry` if computed, a failure on error, or a skip when a
    /// prerequisite is missing.
    fn ledger_from(&mut self, id: &str, entry: Option<Result<LedgerEntry>>, missing: &str) {
        let e = match entry {
            Some(Ok(e)) => e,
            Some(Err(err)) => LedgerEntry::failed(err.to_string()),
            None => LedgerEntry::skipped(format!("needs {missing}")),
        };
        self.ledger(id, e);
    }
}

/// Spectra computed in a run.
struct Spectra {
    base: PeriodSpectrum,
    by_label: Vec<(Functional, PeriodSpectrum)>,
}

impl Spectra {
    fn get(&self, f: &Functional) -> Option<&PeriodSpectrum> {
        self.by_label.iter().find(|(g, _)| g == f).map(|(_, s)| s)
    }
}

/// Every linear image and its inverse proximal, every geometric image loxodromic.
fn check_images(b: &Built, words: &[Word]) -> Result<()> {
    let results: Vec<Result<()>> = words
        .par_iter()
        .map(|w| {
            translation_length(&b.geo.evaluate(w)?)?;
            let m = b.lin.evaluate(w)?;
            for g in [&m, &m.inverse()] {
                if proximality_data(g, PROXIMAL_TOL)?.is_none() {
                    return Err(Error::NotProximal { word: w.to_string() });
                }
            }
            Ok(())
        })
        .collect();
    results.into_iter().collect()
}

fn functionals_of(cfg: &ExperimentConfig) -> Vec<Functional> {
    let mut fs = vec![Functional::Spectral, Functional::Hilbert];
    for f in &cfg.functionals {
        if !fs.contains(f) {
            fs.push(f.clone());
        }
    }
    fs
}

fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

fn span_dim(samples: &[LimitSample]) -> usize {
    let cols: Vec<_> = samples.iter().map(|s| s.line.clone()).collect();
    let sv = DMatrix::from_columns(&cols).svd(false, false).singular_values;
    let m = sv.max();
    sv.iter().filter(|x| **x > SPAN_TOL * m).count()
}

/// Generators and their inverses.
fn short_elements(rank: usize) -> Vec<Word> {
    (0..2 * rank)
        .map(|c| Word::from_reduced(vec![Letter::from_code(c)]).expect("one letter is reduced"))
        .collect()
}

pub fn run(cfg: &ExperimentConfig) -> RunReport {
    let mut cx = Ctx {
        report: RunReport {
            schema_version: SCHEMA_VERSION,
            config: cfg.clone(),
            representation: None,
            results: Results::default(),
            ledger: BTreeMap::new(),
            errors: Vec::new(),
            timings: BTreeMap::new(),
        },
    };
    let tol = cfg.tolerances.clone();
    let geometry = cfg.geometry.clone();

    let words = cx.stage("enumerate", || enumerate_conjugacy_classes(geometry.rank, cfg.max_len));
    cx.report.results.classes = words.as_ref().map(|w| w.len());
    let built = cx.stage("build", || cfg.representation.build(&geometry, cfg.samples.max_len));
    if let Some(b) = &built {
        cx.report.representation = Some(RepSummary {
            label: b.lin.label().to_string(),
            dim: b.lin.dim(),
            rank: b.lin.rank(),
        });
    }
    let evaluated = match (&built, &words) {
        (Some(b), Some(w)) => cx.stage("evaluate", || check_images(b, w)).map(|_| (b.clone(), w.clone())),
        _ => None,
    };

    // spectra and entropies
    let spectra = evaluated.as_ref().and_then(|(b, words)| {
        cx.stage("spectra", || {
            let base = period_spectrum_of(&b.geo, &Functional::TranslationLength, words, cfg.max_len)?;
            let by_label = functionals_of(cfg)
                .into_iter()
                .map(|f| period_spectrum_of(&b.lin, &f, words, cfg.max_len).map(|s| (f, s)))
                .collect::<Result<Vec<_>>>()?;
            Ok(Spectra { base, by_label })
        })
    });
    if let Some(s) = &spectra {
        cx.report.results.spectra = std::iter::once(&s.base)
            .chain(s.by_label.iter().map(|(_, p)| p))
            .map(|p| SpectrumSummary {
                functional: p.functional_label.clone(),
                count: p.len(),
                min: p.values[0],
                max: p.values[p.len() - 1],
            })
            .collect();
    }
    let entropy = spectra.as_ref().and_then(|s| {
        cx.stage("entropy", || {
            let base = growth_rate(&s.base, &cfg.window)?;
            let functionals = s
                .by_label
                .iter()
                .map(|(_, p)| {
                    Ok(EntropyEntry {
                        functional: p.functional_label.clone(),
                        estimate: growth_rate(p, &cfg.window)?,
                        ratio_to_base: entropy_ratio(p, &s.base, &cfg.window)?.ratio,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(EntropyResults { base, functionals })
        })
    });
    cx.report.results.entropy = entropy.clone();

    if let Some(d) = cfg.representation.fuchsian_degree() {
        let entry = spectra.as_ref().zip(entropy.as_ref()).map(|(s, _)| -> Result<LedgerEntry> {
            let base: HashMap<&Word, f64> = s.base.words.iter().zip(s.base.values.iter().copied()).collect();
            let sp = s.get(&Functional::Spectral).expect("spectral spectrum is always computed");
            let c = (d - 1) as f64 / 2.0;
            let worst = sp
                .words
                .iter()
                .zip(&sp.values)
                .map(|(w, v)| rel(*v, c * base[w]))
                .fold(0.0, f64::max);
            let r = entropy_ratio(sp, &s.base, &cfg.window)?.ratio;
            Ok(LedgerEntry::from_checks(vec![
                Check::at_most("ladder_max_rel", worst, tol.ladder),
                Check::equals("entropy_ratio", r, 2.0 / (d - 1) as f64, tol.ladder * 2.0 / (d - 1) as f64),
            ]))
        });
        cx.ledger_from("AC1", entry, "spectra");
    }

    if cfg.representation.is_klein() {
        let entry = evaluated.as_ref().zip(spectra.as_ref()).map(|((b, words), s)| -> Result<LedgerEntry> {
            let base: HashMap<&Word, f64> = s.base.words.iter().zip(s.base.values.iter().copied()).collect();
            let sp = s.get(&Functional::Spectral).expect("spectral spectrum is always computed");
            let worst = sp.words.iter().zip(&sp.values).map(|(w, v)| (v - base[w]).abs()).fold(0.0, f64::max);
            let sample_words = enumerate_conjugacy_classes(b.geo.rank(), cfg.samples.max_len)?;
            let ad = adjoint_irreducible(&b.geo, &sample_words)?;
            let adv = words
                .par_iter()
                .map(|w| Ok((lambda1(&ad.rep.evaluate(w)?)? - 2.0 * base[w]).abs()))
                .collect::<Result<Vec<f64>>>()?;
            let worst_ad = adv.into_iter().fold(0.0, f64::max);
            Ok(LedgerEntry::from_checks(vec![
                Check::at_most("lambda1_vs_length", worst, tol.klein),
                Check::at_most("adjoint_lambda1_vs_twice_length", worst_ad, tol.klein),
            ]))
        });
        cx.ledger_from("AC2", entry, "spectra");
    }

    // weyl ratio for the type-A system of the linear representation
    let weyl = built.as_ref().and_then(|b| {
        cx.stage("weyl", || {
            let d = b.lin.dim();
            let rs = root_system(WeylKind::A, d - 1)?;
            Ok(WeylResults {
                system: rs.name(),
                barycenter: format_vector(&barycenter(&rs)),
                ratio_bound: ratio_bound(&rs).to_string(),
            })
        })
    });
    let ratio_a = built.as_ref().map(|b| {
        let rs = root_system(WeylKind::A, b.lin.dim() - 1).expect("dimension is at least 2");
        ratio_bound(&rs)
    });
    cx.ledger_from(
        "AC3",
        built.as_ref().zip(ratio_a).map(|(b, r)| {
            let d = b.lin.dim() as i64;
            Ok(LedgerEntry::from_checks(vec![Check::flag(
                format!("ratio_bound A({}) = 2/{}", d - 1, d - 1),
                r == num_rational::Rational64::new(2, d - 1),
            )]))
        }),
        "representation",
    );
    cx.report.results.weyl = weyl;

    // limit samples and the cross-ratio suite
    let samples = evaluated.as_ref().and_then(|(b, _)| {
        cx.stage("samples", || {
            let words = enumerate_conjugacy_classes(b.geo.rank(), cfg.samples.max_len)?;
            limit_samples(&b.geo, &b.lin, &words)
        })
    });
    cx.report.results.samples = samples.as_ref().map(|s| s.len());

    let cross = evaluated.as_ref().zip(samples.as_ref()).map(|((b, _), s)| {
        let t0 = Instant::now();
        let out = crossratio_suite(cfg, b, s);
        cx.report.timings.insert("crossratio".into(), t0.elapsed().as_secs_f64());
        out
    });
    match cross {
        Some(Ok((res, ac5, ac8))) => {
            cx.report.results.crossratio = Some(res);
            cx.ledger("AC5", ac5);
            cx.ledger("AC8", ac8);
        }
        Some(Err(e)) => {
            cx.report.errors.push(StageError {
                stage: "crossratio".into(),
                message: e.to_string(),
            });
            cx.ledger("AC5", LedgerEntry::failed(e.to_string()));
            cx.ledger("AC8", LedgerEntry::skipped("needs the cross-ratio stage"));
        }
        None => {
            cx.ledger("AC5", LedgerEntry::skipped("needs limit samples"));
            cx.ledger("AC8", LedgerEntry::skipped("needs limit samples"));
        }
    }

    // rank
    let rank = evaluated.as_ref().zip(samples.as_ref()).and_then(|((b, _), s)| {
        cx.stage("rank", || {
            let p_max = cfg.samples.rank_p_max.unwrap_or(b.lin.dim() + 1);
            let estimate = rank_estimate(
                &projective,
                s,
                p_max,
                cfg.samples.rank_trials,
                tol.rank,
                cfg.samples.rank_min_chord,
                cfg.seed,
            )?;
            Ok(RankResults {
                estimate,
                span_dim: span_dim(s),
                expected: cfg.representation.expected_rank(&geometry),
                p_max,
            })
        })
    });
    cx.ledger_from(
        "AC6",
        rank.as_ref().map(|r| {
            let want = r.expected.unwrap_or(r.span_dim);
            let mut checks = vec![Check::flag(
                format!("rank {} = {want}", r.estimate),
                r.estimate == RankEstimate::Rank(want),
            )];
            if r.expected.is_some() {
                checks.push(Check::flag(format!("span {} = {want}", r.span_dim), r.span_dim == want));
            }
            Ok(LedgerEntry::from_checks(checks))
        }),
        "limit samples",
    );
    cx.report.results.rank = rank;

    // Hölder exponents
    let holder = evaluated.as_ref().zip(samples.as_ref()).and_then(|((b, words), s)| {
        cx.stage("holder", || {
            let ub = holder_upper_bound(&b.geo, &b.lin, words)?;
            let fb = flag_holder_upper_bound(&b.geo, &b.lin, words)?;
            let fit = holder_exponent_fit(&holder_pairs(s, cfg.samples.holder_pairs, cfg.seed)).ok();
            let sample_words = enumerate_conjugacy_classes(b.geo.rank(), cfg.samples.max_len)?;
            let flag = flag_holder_pairs(&b.geo, &b.lin, &sample_words, cfg.samples.holder_pairs, cfg.seed)
                .and_then(|p| FlagHolderFit::from_pairs(&p))
                .ok();
            Ok(HolderResults {
                upper_bound: ub.bound,
                upper_bound_word: ub.argmin.to_string(),
                flag_upper_bound: fb.bound,
                fit,
                flag_fit: flag.as_ref().map(|f| f.alpha),
                flag_fit_per_factor: flag.map(|f| f.per_factor).unwrap_or_default(),
            })
        })
    });
    cx.report.results.holder = holder.clone();

    // desk inequalities
    let ineq = holder.as_ref().zip(entropy.as_ref()).map(|(h, e)| {
        let slack = 1.0 + tol.entropy_slack;
        let find = |label: &str| e.functionals.iter().find(|f| f.functional == label).map(|f| f.ratio_to_base);
        let spectral = find("lambda1").expect("spectral entropy is always computed");
        let hilbert = find("hilbert").expect("hilbert entropy is always computed");
        let mut checks = vec![
            Check::at_most("theorem_a_spectral", h.upper_bound * spectral, slack),
            Check::at_most("theorem_a_hilbert", h.upper_bound * hilbert, slack),
        ];
        if let Some(d) = cfg.representation.tau_degree() {
            let rs = root_system(WeylKind::A, d - 1)?;
            let bound = ratio_bound(&rs).to_f64().unwrap_or(f64::NAN);
            checks.push(Check::at_most("theorem_c_highest_weight", h.upper_bound * spectral, bound * slack));
        }
        if cfg.representation.fuchsian_degree().is_some() || cfg.representation.is_klein() {
            match &h.fit {
                Some(f) => checks.push(Check::at_most(
                    "holder_fit_below_bound",
                    f.alpha,
                    h.upper_bound * (1.0 + tol.holder_slack),
                )),
                None => checks.push(Check::flag("holder_fit_available", false)),
            }
        }
        Ok(LedgerEntry::from_checks(checks))
    });
    cx.ledger_from("AC9", ineq, "entropy and Hölder bounds");

    cx.report
}

pub(crate) type SuiteOut = (CrossRatioResults, LedgerEntry, LedgerEntry);

pub(crate) fn crossratio_suite(cfg: &ExperimentConfig, b: &Built, s: &[LimitSample]) -> Result<SuiteOut> {
    let tol = &cfg.tolerances;
    let tuples = sample_tuples::<5>(s, cfg.samples.tuples, cfg.samples.min_chord, cfg.seed)?;
    let axioms = axiom_check(&projective, s, &tuples, tol.axiom)?;

    let mut gromov = 0.0f64;
    let mut min_value = f64::INFINITY;
    let mut invariance = 0.0f64;
    let gamma: Word = "a".parse()?;
    let (g_geo, g_lin) = (b.geo.evaluate(&gamma)?, b.lin.evaluate(&gamma)?);
    let moved: Vec<LimitSample> = s.iter().map(|x| x.translate_by(&g_geo, &g_lin)).collect::<Result<_>>()?;
    for t in &tuples {
        let [x, y, z, w, _] = *t;
        let ft = FourTuple::new(&s[x], &s[y], &s[z], &s[w])?;
        let bv = cross_ratio(&ft)?;
        min_value = min_value.min(bv);
        gromov = gromov.max(rel(cross_ratio_from_gromov(&ft)?, bv.abs()));
        let mt = FourTuple::new(&moved[x], &moved[y], &moved[z], &moved[w])?;
        invariance = invariance.max(rel(cross_ratio(&mt)?, bv));
    }

    // adjoint identity with the adjoint representation's own limit map
    let words: Vec<Word> = s.iter().map(|x| x.word.clone()).collect();
    let adjoint = adjoint_irreducible(&b.lin, &words).and_then(|ad| {
        let eta = limit_samples(&b.geo, &ad.rep, &words)?;
        if eta.len() != s.len() {
            return Err(Error::Degenerate("adjoint samples do not match".into()));
        }
        let mut worst = 0.0f64;
        for t in &tuples {
            let [x, y, z, w, _] = *t;
            let lhs = cross_ratio(&FourTuple::new(&eta[x], &eta[y], &eta[z], &eta[w])?)?;
            let r1 = cross_ratio(&FourTuple::new(&s[x], &s[y], &s[z], &s[w])?)?;
            let r2 = cross_ratio(&FourTuple::new(&s[y], &s[x], &s[w], &s[z])?)?;
            worst = worst.max(rel(lhs, r1 * r2));
        }
        Ok(worst)
    });

    let mut checks: Vec<Check> = axioms
        .axioms
        .iter()
        .map(|a| Check::at_most(format!("axiom_{}", a.name), a.max_violation, tol.axiom))
        .collect();
    checks.push(Check::at_most("gromov_vs_abs_b", gromov, tol.gromov));
    checks.push(Check::at_most("gamma_invariance", invariance, tol.axiom));
    let mut note = None;
    match &adjoint {
        Ok(v) => checks.push(Check::at_most("adjoint_identity", *v, tol.adjoint)),
        Err(e) => {
            checks.push(Check::flag("adjoint_identity", false));
            note = Some(format!("adjoint: {e}"));
        }
    }
    if cfg.representation.is_klein() && cfg.geometry.k >= 3 {
        checks.push(Check::flag("nonnegative", min_value >= 0.0));
    }
    let mut ac5 = LedgerEntry::from_checks(checks);
    if let Some(n) = note {
        ac5 = ac5.with_note(n);
    }

    // cocycle identity and Gromov equivariance
    let elems = short_elements(b.lin.rank());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
    let mut cocycle = 0.0f64;
    let mut equiv = 0.0f64;
    for _ in 0..cfg.samples.tuples.min(500) {
        let g0 = &elems[rng.gen_range(0..elems.len())];
        let g1 = &elems[rng.gen_range(0..elems.len())];
        let x = &s[rng.gen_range(0..s.len())];
        let (m0, m1) = (b.lin.evaluate(g0)?, b.lin.evaluate(g1)?);
        let g1x = x.translate_by(&b.geo.evaluate(g1)?, &m1)?;
        cocycle = cocycle.max((beta(&m0.mul(&m1), x) - beta(&m0, &g1x) - beta(&m1, x)).abs());
        let y = &s[rng.gen_range(0..s.len())];
        if x.base.chord(&y.base) < cfg.samples.min_chord {
            continue;
        }
        let g0_geo = b.geo.evaluate(g0)?;
        let (gx, gy) = (x.translate_by(&g0_geo, &m0)?, y.translate_by(&g0_geo, &m0)?);
        let lhs = gromov_bracket(&gx, &gy) - gromov_bracket(x, y);
        equiv = equiv.max((lhs + beta_bar(&m0, x) + beta(&m0, y)).abs());
    }
    let ac8 = LedgerEntry::from_checks(vec![
        Check::at_most("cocycle_identity", cocycle, tol.cocycle),
        Check::at_most("gromov_equivariance", equiv, tol.cocycle),
    ]);

    let benoist_question = if b.lin.rank() >= 2 {
        benoist_experiment(&b.geo, &b.lin, &gamma, &"b".parse()?, 8).ok()
    } else {
        None
    };
    Ok((
        CrossRatioResults {
            tuples: tuples.len(),
            axioms,
            gromov_max_rel: gromov,
            invariance_max_rel: invariance,
            adjoint_max_rel: adjoint.ok(),
            min_value,
            benoist_question,
        },
        ac5,
        ac8,
    ))
}

/// Writes `report.json`, spectra and sample CSVs, and `estimates.json` into `dir`.
pub fn write_outputs(cfg: &ExperimentConfig, report: &RunReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("report.json"), report.to_json()?)?;
    if let Some(e) = &report.results.entropy {
        let mut m = BTreeMap::new();
        m.insert("translation_length".to_string(), e.base.clone());
        for f in &e.functionals {
            m.insert(f.functional.clone(), f.estimate.clone());
        }
        std::fs::write(dir.join("estimates.json"), serde_json::to_string_pretty(&m)?)?;
    }
    // spectra and samples are cheap to rebuild and keep the report small
    let b = cfg.representation.build(&cfg.geometry, cfg.samples.max_len)?;
    let words = enumerate_conjugacy_classes(cfg.geometry.rank, cfg.max_len)?;
    if report.results.entropy.is_some() {
        let base = period_spectrum_of(&b.geo, &Functional::TranslationLength, &words, cfg.max_len)?;
        base.write_csv(std::fs::File::create(dir.join("spectrum_translation_length.csv"))?)?;
        for f in functionals_of(cfg) {
            let p = period_spectrum_of(&b.lin, &f, &words, cfg.max_len)?;
            let name = format!("spectrum_{}.csv", sanitize(&p.functional_label));
            p.write_csv(std::fs::File::create(dir.join(name))?)?;
        }
    }
    if report.results.samples.is_some() {
        let sw = enumerate_conjugacy_classes(cfg.geometry.rank, cfg.samples.max_len)?;
        let s = limit_samples(&b.geo, &b.lin, &sw)?;
        write_samples_csv(&s, std::fs::File::create(dir.join("samples.csv"))?)?;
    }
    Ok(())
}

fn sanitize(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect()
}

/// Jordan vectors of the linear images, for callers that want the raw data.
pub fn jordan_table(rep: &Representation, words: &[Word]) -> Result<Vec<(Word, Vec<f64>)>> {
    let je = JordanEvaluator::new(rep)?;
    words.par_iter().map(|w| Ok((w.clone(), je.jordan(w)?.values().to_vec()))).collect()
}
