pub mod entropy;
pub mod error;
pub mod crossratio;
pub mod harness;
pub mod hypgeom;
pub mod reps;
pub mod spectral;
pub mod weyl;
pub mod words;

pub use error::{Error, Result};
