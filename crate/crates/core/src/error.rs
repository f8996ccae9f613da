use thiserror::Error;

use crate::words::Word;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("word reduces to the identity")]
    IdentityWord,
    #[error("letter {letter} is outside a rank-{rank} alphabet")]
    LetterOutOfRange { letter: String, rank: usize },
    #[error("cannot parse word {0:?}")]
    WordParse(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("matrix is singular or not finite")]
    Singular,
    #[error("eigensolver failed on a {dim}x{dim} matrix (residual {residual:e})")]
    EigenSolver { dim: usize, residual: f64 },
    #[error("element {word} is not proximal")]
    NotProximal { word: String },
    #[error("element is not hyperbolic (translation length {0:e})")]
    NotHyperbolic(f64),
    #[error("matrix does not preserve the Lorentz form (residual {0:e})")]
    NotLorentz(f64),
    #[error("ping-pong failed: half-spaces {0} and {1} intersect (margin {2:e})")]
    PingPong(usize, usize, f64),
    #[error("span dimension unstable: {half} from half the samples, {full} from all")]
    InsufficientSampling { half: usize, full: usize },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("nonpositive period {value:e} for class {word}")]
    NonPositivePeriod { word: String, value: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn not_proximal(word: &Word) -> Self {
        Error::NotProximal { word: word.to_string() }
    }
}
