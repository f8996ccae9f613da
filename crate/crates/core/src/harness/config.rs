use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::entropy::{Functional, WindowPolicy};
use crate::error::{Error, Result};
use crate::reps::{
    adjoint_irreducible, exterior_power_rep, klein_schottky, perturb, psl2_schottky, sym_power_rep, Axes,
    Representation, SchottkyParams,
};
use crate::words::enumerate_conjugacy_classes;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub k: usize,
    pub rank: usize,
    pub length: f64,
    #[serde(default = "default_axes")]
    pub axes: Axes,
    #[serde(default)]
    pub seed: u64,
}

fn default_axes() -> Axes {
    Axes::Perpendicular
}

impl GeometryConfig {
    pub fn params(&self) -> Result<SchottkyParams> {
        SchottkyParams::new(self.k, self.rank, self.length, self.axes, self.seed)
    }
}

/// How the linear representation is built from the Schottky group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Recipe {
    /// The Klein-model image in `SO(1, k)`.
    Klein,
    /// `Sym^{d-1}` of the `PSL(2, R)` lift; needs `k = 2`.
    SymPower { d: usize },
    Exterior { n: usize, of: Box<Recipe> },
    Adjoint { of: Box<Recipe> },
    Perturb { eps: f64, seed: u64, of: Box<Recipe> },
}

/// Built geometric and linear representations.
#[derive(Clone, Debug)]
pub struct Built {
    pub geo: Representation,
    pub lin: Representation,
}

impl Recipe {
    pub fn build(&self, geometry: &GeometryConfig, sample_len: usize) -> Result<Built> {
        let params = geometry.params()?;
        let (geo, _) = klein_schottky(&params)?;
        let lin = self.linear(&params, &geo, sample_len)?;
        Ok(Built { geo, lin })
    }

    fn linear(&self, params: &SchottkyParams, geo: &Representation, sample_len: usize) -> Result<Representation> {
        match self {
            Recipe::Klein => Ok(geo.clone()),
            Recipe::SymPower { d } => {
                if params.k != 2 {
                    return Err(Error::Config(format!("sym_power needs k = 2, got k = {}", params.k)));
                }
                let (r2, _) = psl2_schottky(params)?;
                sym_power_rep(&r2, *d)
            }
            Recipe::Exterior { n, of } => exterior_power_rep(&of.linear(params, geo, sample_len)?, *n),
            Recipe::Adjoint { of } => {
                let inner = of.linear(params, geo, sample_len)?;
                let words = enumerate_conjugacy_classes(inner.rank(), sample_len)?;
                Ok(adjoint_irreducible(&inner, &words)?.rep)
            }
            Recipe::Perturb { eps, seed, of } => perturb(&of.linear(params, geo, sample_len)?, *eps, *seed),
        }
    }

    /// `d` when this is an unperturbed symmetric power.
    pub fn fuchsian_degree(&self) -> Option<usize> {
        match self {
            Recipe::SymPower { d } => Some(*d),
            _ => None,
        }
    }

    /// `d` for a symmetric power or a perturbation of one.
    pub fn tau_degree(&self) -> Option<usize> {
        match self {
            Recipe::SymPower { d } => Some(*d),
            Recipe::Perturb { of, .. } => of.tau_degree(),
            _ => None,
        }
    }

    pub fn is_klein(&self) -> bool {
        matches!(self, Recipe::Klein)
    }

    /// Rank of the projective cross ratio when it is known in closed form.
    pub fn expected_rank(&self, geometry: &GeometryConfig) -> Option<usize> {
        match self {
            // the limit set spans a totally geodesic H^min(rank, k)
            Recipe::Klein => Some(geometry.rank.min(geometry.k) + 1),
            Recipe::SymPower { d } => Some(*d),
            _ => None,
        }
    }
}

/// Overridable tolerances; defaults are the acceptance values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub ladder: f64,
    pub klein: f64,
    pub axiom: f64,
    pub gromov: f64,
    pub adjoint: f64,
    pub cocycle: f64,
    pub rank: f64,
    pub entropy_slack: f64,
    pub holder_slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            ladder: 1e-9,
            klein: 1e-8,
            axiom: 1e-8,
            gromov: 1e-9,
            adjoint: 1e-8,
            cocycle: 1e-8,
            rank: 1e-8,
            entropy_slack: 0.1,
            holder_slack: 0.15,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleConfig {
    /// Word length for limit-map samples.
    pub max_len: usize,
    pub tuples: usize,
    /// Minimum chord between base points inside a cross-ratio tuple.
    pub min_chord: f64,
    /// Same for the rank test, which needs `2(p_max + 1)` separated points.
    pub rank_min_chord: f64,
    pub rank_p_max: Option<usize>,
    pub rank_trials: usize,
    pub holder_pairs: usize,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            max_len: 6,
            tuples: 1000,
            min_chord: 0.2,
            rank_min_chord: 0.05,
            rank_p_max: None,
            rank_trials: 30,
            holder_pairs: 100_000,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub label: String,
    #[serde(default)]
    pub seed: u64,
    pub max_len: usize,
    pub geometry: GeometryConfig,
    pub representation: Recipe,
    /// Extra functionals; `lambda1` and `hilbert` are always computed.
    #[serde(default)]
    pub functionals: Vec<Functional>,
    #[serde(default)]
    pub window: WindowPolicy,
    #[serde(default)]
    pub samples: SampleConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        ExperimentConfig::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.max_len == 0 {
            return bad("max_len must be positive".into());
        }
        if self.samples.max_len == 0 {
            return bad("samples.max_len must be positive".into());
        }
        if self.samples.tuples == 0 || self.samples.rank_trials == 0 {
            return bad("samples.tuples and samples.rank_trials must be positive".into());
        }
        if self.functionals.contains(&Functional::TranslationLength) {
            return bad("translation_length is always computed as the base spectrum".into());
        }
        validate_recipe(&self.representation, 0)
    }
}

fn validate_recipe(r: &Recipe, depth: usize) -> Result<()> {
    if depth > 16 {
        return Err(Error::Config("recipe nesting deeper than 16".into()));
    }
    match r {
        Recipe::Klein => Ok(()),
        Recipe::SymPower { d } if *d >= 2 => Ok(()),
        Recipe::SymPower { d } => Err(Error::Config(format!("sym_power needs d >= 2, got {d}"))),
        Recipe::Exterior { n, of } if *n >= 1 => validate_recipe(of, depth + 1),
        Recipe::Exterior { .. } => Err(Error::Config("exterior needs n >= 1".into())),
        Recipe::Adjoint { of } => validate_recipe(of, depth + 1),
        Recipe::Perturb { eps, of, .. } if eps.is_finite() && *eps >= 0.0 => validate_recipe(of, depth + 1),
        Recipe::Perturb { eps, .. } => Err(Error::Config(format!("perturb needs eps >= 0, got {eps}"))),
    }
}
