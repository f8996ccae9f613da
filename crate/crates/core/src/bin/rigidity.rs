use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use rigidity::crossratio::{
    axiom_check, benoist_experiment, flag_holder_pairs, flag_holder_upper_bound, holder_exponent_fit, holder_pairs,
    holder_upper_bound, limit_samples, projective, rank_estimate, sample_tuples, write_samples_csv, FlagHolderFit,
};
use rigidity::entropy::{growth_rate, period_spectrum_of, Functional, WindowPolicy};
use rigidity::harness::config::Built;
use rigidity::harness::{acceptance, run, write_outputs, ExperimentConfig, GeometryConfig, Recipe, Status};
use rigidity::reps::{Axes, Representation};
use rigidity::weyl::{weyl_table, write_weyl_csv};
use rigidity::words::enumerate_conjugacy_classes;
use rigidity::{Error, Result};

#[derive(Parser)]
#[command(name = "rigidity", version, about = "Entropy rigidity, cross ratios and Weyl-chamber bounds for Schottky representations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Largest cyclic word length.
    #[arg(long, global = true)]
    max_len: Option<usize>,
    /// Output file (or directory for `run`); stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Klein,
    SymPower,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FunctionalArg {
    Spectral,
    Hilbert,
    TranslationLength,
}

impl FunctionalArg {
    fn functional(self) -> Functional {
        match self {
            FunctionalArg::Spectral => Functional::Spectral,
            FunctionalArg::Hilbert => Functional::Hilbert,
            FunctionalArg::TranslationLength => Functional::TranslationLength,
        }
    }
}

/// Schottky group and linear representation.
#[derive(Args, Clone)]
struct RepArgs {
    #[arg(long, value_enum, default_value_t = Kind::Klein)]
    kind: Kind,
    /// Hyperbolic dimension of the Klein model.
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Number of free generators.
    #[arg(long, default_value_t = 2)]
    rank: usize,
    /// Translation length of each generator.
    #[arg(long, default_value_t = 2.0)]
    length: f64,
    /// Dimension of the symmetric power (`--kind sym-power`).
    #[arg(long, default_value_t = 3)]
    d: usize,
    /// Operator norm of an additive perturbation of the generators.
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    /// Linear representation JSON replacing the built one.
    #[arg(long)]
    rep: Option<PathBuf>,
}

impl RepArgs {
    fn build(&self, seed: u64) -> Result<Built> {
        let geometry = GeometryConfig {
            k: self.k,
            rank: self.rank,
            length: self.length,
            axes: Axes::Perpendicular,
            seed,
        };
        let base = match self.kind {
            Kind::Klein => Recipe::Klein,
            Kind::SymPower => Recipe::SymPower { d: self.d },
        };
        let recipe = if self.eps > 0.0 {
            Recipe::Perturb {
                eps: self.eps,
                seed,
                of: Box::new(base),
            }
        } else {
            base
        };
        let mut built = recipe.build(&geometry, 5)?;
        if let Some(p) = &self.rep {
            let lin = Representation::from_json(&std::fs::read_to_string(p)?)?;
            if lin.rank() != built.geo.rank() {
                return Err(Error::InvalidArgument(format!(
                    "representation has {} generators, geometry has {}",
                    lin.rank(),
                    built.geo.rank()
                )));
            }
            built.lin = lin;
        }
        Ok(built)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Conjugacy classes of the free group, one cyclically reduced
    /// representative each; the index set of every orbit count.
    Enumerate {
        #[arg(long, default_value_t = 2)]
        rank: usize,
    },
    /// Period spectrum per class: checks the Fuchsian ladder
    /// lambda_1(tau_d g) = (d-1)/2 |g| and the Klein identity lambda_1 = |g|.
    Spectrum {
        #[command(flatten)]
        rep: RepArgs,
        #[arg(long, value_enum, default_value_t = FunctionalArg::Spectral)]
        functional: FunctionalArg,
        /// Also write the linear representation JSON to this path.
        #[arg(long)]
        save_rep: Option<PathBuf>,
    },
    /// Growth-rate estimates of spectral, Hilbert and translation-length
    /// entropies; h_rho = H_rho = 2/(d-1) h_Gamma on the Fuchsian locus.
    Entropy {
        #[command(flatten)]
        rep: RepArgs,
    },
    /// Cross-ratio axioms on limit-map samples and the exponential-of-periods
    /// experiment; writes samples with --out.
    Crossratio {
        #[command(flatten)]
        rep: RepArgs,
        #[arg(long, default_value_t = 1000)]
        tuples: usize,
        #[arg(long, default_value_t = 0.2)]
        min_chord: f64,
    },
    /// Rank of the projective cross ratio from chi^p determinants: the rank of
    /// B_{H^k} is k+1, and b has rank d when the limit curve spans R^d.
    Rank {
        #[command(flatten)]
        rep: RepArgs,
        #[arg(long)]
        p_max: Option<usize>,
        #[arg(long, default_value_t = 30)]
        trials: usize,
    },
    /// Hölder exponent of the limit map: a priori bound from root gaps over
    /// translation length, and the lower-envelope log-log fit; an exponent
    /// alpha satisfies alpha h_rho <= h_Gamma.
    Holder {
        #[command(flatten)]
        rep: RepArgs,
        #[arg(long, default_value_t = 100_000)]
        pairs: usize,
    },
    /// Barycenter ratios alpha(bar)/chi(bar): 2/(d-1) for A(d-1), 2/(2n-1)
    /// for C(n), 1/n for B(n), 1/3 for G2, as exact fractions.
    WeylTable,
    /// Runs the acceptance suite (ladder, Klein and adjoint identities, Weyl
    /// ratios, chamber maxima, cross-ratio axioms, rank, contraction rates,
    /// cocycle identities, entropy inequalities, enumeration oracle) and
    /// prints one line per criterion.
    Verify {
        /// Restrict to these criterion ids.
        #[arg(long)]
        only: Vec<String>,
    },
    /// Runs a TOML experiment configuration and writes its report.
    Run { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::InvalidArgument(_) | Error::WordParse(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn emit_json<T: Serialize>(out: &Option<PathBuf>, v: &T) -> Result<()> {
    let mut w = sink(out)?;
    writeln!(w, "{}", serde_json::to_string_pretty(v)?)?;
    Ok(())
}

/// Returns whether every check passed.
fn dispatch(cli: &Cli) -> Result<bool> {
    let max_len = cli.max_len.unwrap_or(8);
    if max_len == 0 {
        return Err(Error::InvalidArgument("--max-len must be positive".into()));
    }
    let json = cli.format == Some(Format::Json);
    match &cli.command {
        Command::Enumerate { rank } => {
            let words = enumerate_conjugacy_classes(*rank, max_len)?;
            if json {
                let v: Vec<String> = words.iter().map(|w| w.to_string()).collect();
                emit_json(&cli.out, &v)?;
            } else {
                let mut w = csv::Writer::from_writer(sink(&cli.out)?);
                w.write_record(["word", "length"])?;
                for x in &words {
                    w.write_record([x.to_string(), x.len().to_string()])?;
                }
                w.flush()?;
            }
            Ok(true)
        }
        Command::Spectrum { rep, functional, save_rep } => {
            let b = rep.build(cli.seed)?;
            if let Some(p) = save_rep {
                std::fs::write(p, b.lin.to_json()?)?;
            }
            let words = enumerate_conjugacy_classes(b.geo.rank(), max_len)?;
            let f = functional.functional();
            let src = if f == Functional::TranslationLength { &b.geo } else { &b.lin };
            let ps = period_spectrum_of(src, &f, &words, max_len)?;
            if json {
                emit_json(&cli.out, &ps)?;
            } else {
                ps.write_csv(sink(&cli.out)?)?;
            }
            Ok(true)
        }
        Command::Entropy { rep } => {
            let b = rep.build(cli.seed)?;
            let words = enumerate_conjugacy_classes(b.geo.rank(), max_len)?;
            let window = WindowPolicy::default();
            let mut rows = Vec::new();
            for f in [Functional::TranslationLength, Functional::Spectral, Functional::Hilbert] {
                let src = if f == Functional::TranslationLength { &b.geo } else { &b.lin };
                let ps = period_spectrum_of(src, &f, &words, max_len)?;
                rows.push((f.label(), growth_rate(&ps, &window)?));
            }
            if cli.format == Some(Format::Csv) {
                let mut w = csv::Writer::from_writer(sink(&cli.out)?);
                w.write_record(["functional", "h", "window_lo", "window_hi", "residual", "count"])?;
                for (label, g) in &rows {
                    w.write_record([
                        label.clone(),
                        format!("{:e}", g.h),
                        format!("{:e}", g.window.0),
                        format!("{:e}", g.window.1),
                        format!("{:e}", g.residual),
                        g.count_at_hi.to_string(),
                    ])?;
                }
                w.flush()?;
            } else {
                let m: std::collections::BTreeMap<_, _> = rows.into_iter().collect();
                emit_json(&cli.out, &m)?;
            }
            Ok(true)
        }
        Command::Crossratio { rep, tuples, min_chord } => {
            let b = rep.build(cli.seed)?;
            let words = enumerate_conjugacy_classes(b.geo.rank(), max_len.min(6))?;
            let s = limit_samples(&b.geo, &b.lin, &words)?;
            let t = sample_tuples::<5>(&s, *tuples, *min_chord, cli.seed)?;
            let report = axiom_check(&projective, &s, &t, 1e-8)?;
            if cli.format == Some(Format::Csv) {
                write_samples_csv(&s, sink(&cli.out)?)?;
            } else {
                if let Some(p) = &cli.out {
                    write_samples_csv(&s, std::fs::File::create(p)?)?;
                }
                #[derive(Serialize)]
                struct Summary<'a> {
                    samples: usize,
                    axioms: &'a rigidity::crossratio::AxiomReport,
                    benoist_question: Option<rigidity::crossratio::BenoistExperiment>,
                }
                let bq = if b.geo.rank() >= 2 {
                    benoist_experiment(&b.geo, &b.lin, &"a".parse()?, &"b".parse()?, 8).ok()
                } else {
                    None
                };
                let summary = Summary {
                    samples: s.len(),
                    axioms: &report,
                    benoist_question: bq,
                };
                println!("{}", serde_json::to_string_pretty(&summary)?);
            }
            Ok(report.passed())
        }
        Command::Rank { rep, p_max, trials } => {
            let b = rep.build(cli.seed)?;
            let words = enumerate_conjugacy_classes(b.geo.rank(), max_len.min(6))?;
            let s = limit_samples(&b.geo, &b.lin, &words)?;
            let p_max = p_max.unwrap_or(b.lin.dim() + 1);
            let est = rank_estimate(&projective, &s, p_max, *trials, 1e-8, 0.05, cli.seed)?;
            if json {
                emit_json(&cli.out, &est)?;
            } else {
                writeln!(sink(&cli.out)?, "{est}")?;
            }
            Ok(true)
        }
        Command::Holder { rep, pairs } => {
            let b = rep.build(cli.seed)?;
            let words = enumerate_conjugacy_classes(b.geo.rank(), max_len)?;
            let sample_words = enumerate_conjugacy_classes(b.geo.rank(), max_len.min(6))?;
            let s = limit_samples(&b.geo, &b.lin, &sample_words)?;
            let ub = holder_upper_bound(&b.geo, &b.lin, &words)?;
            let fb = flag_holder_upper_bound(&b.geo, &b.lin, &words)?;
            let fit = holder_exponent_fit(&holder_pairs(&s, *pairs, cli.seed));
            let flag = flag_holder_pairs(&b.geo, &b.lin, &sample_words, *pairs, cli.seed)
                .and_then(|p| FlagHolderFit::from_pairs(&p));
            #[derive(Serialize)]
            struct Out {
                upper_bound: f64,
                upper_bound_word: String,
                flag_upper_bound: f64,
                fit: Option<rigidity::crossratio::HolderFit>,
                fit_error: Option<String>,
                flag_fit: Option<f64>,
                flag_fit_per_factor: Vec<f64>,
            }
            let (fit, fit_error) = match fit {
                Ok(f) => (Some(f), None),
                Err(e) => (None, Some(e.to_string())),
            };
            let flag = flag.ok();
            emit_json(
                &cli.out,
                &Out {
                    upper_bound: ub.bound,
                    upper_bound_word: ub.argmin.to_string(),
                    flag_upper_bound: fb.bound,
                    fit,
                    fit_error,
                    flag_fit: flag.as_ref().map(|f| f.alpha),
                    flag_fit_per_factor: flag.map(|f| f.per_factor).unwrap_or_default(),
                },
            )?;
            Ok(true)
        }
        Command::WeylTable => {
            let rows = weyl_table();
            if json {
                emit_json(&cli.out, &rows)?;
            } else {
                write_weyl_csv(&rows, sink(&cli.out)?)?;
            }
            Ok(true)
        }
        Command::Verify { only } => {
            for id in only {
                if !acceptance::IDS.contains(&id.as_str()) {
                    return Err(Error::InvalidArgument(format!("unknown criterion {id}")));
                }
            }
            let mut ok = true;
            let mut outcomes = Vec::new();
            for id in acceptance::IDS.iter().filter(|id| only.is_empty() || only.iter().any(|o| o == *id)) {
                let o = acceptance::run_one(id).expect("listed id");
                println!("{o}");
                ok &= o.status != Status::Fail;
                outcomes.push(o);
            }
            if let Some(p) = &cli.out {
                std::fs::write(p, serde_json::to_string_pretty(&outcomes)?)?;
            }
            Ok(ok)
        }
        Command::Run { config } => run_config(cli, config),
    }
}

fn run_config(cli: &Cli, path: &Path) -> Result<bool> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(n) = cli.max_len {
        cfg.max_len = n;
        cfg.validate()?;
    }
    let report = run(&cfg);
    let dir = cli.out.clone().or_else(|| cfg.output.dir.clone());
    match &dir {
        Some(d) => write_outputs(&cfg, &report, d)?,
        None => println!("{}", report.to_json()?),
    }
    for (id, e) in &report.ledger {
        eprintln!("{id} {}{}", e.status, e.note.as_ref().map(|n| format!(" ({n})")).unwrap_or_default());
    }
    for e in &report.errors {
        eprintln!("stage {} failed: {}", e.stage, e.message);
    }
    Ok(report.passed())
}
