use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("corpus root not found: {}", .0.display())]
    CorpusRootNotFound(PathBuf),

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("split ratio {0} is outside [0, 1]")]
    InvalidRatio(f64),

    #[error("feature arity {0} is outside 1..=3")]
    InvalidArity(usize),

    #[error("invalid stem {0:?}")]
    InvalidStem(String),

    #[error("no candidate features")]
    NoCandidateFeatures,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("training requires both classes")]
    SingleClassCorpus,

    #[error("need both classes for downstream training")]
    GeneratorNeedsBothClasses,

    #[error("unrecognized model file: {0}")]
    ModelFormat(String),

    #[error("length mismatch: {predictions} predictions vs {gold} gold labels")]
    LengthMismatch { predictions: usize, gold: usize },

    #[error("need at least one threat and one normal example")]
    SingleClassGold,

    #[error("confusion counts are all zero")]
    EmptyConfusion,

    #[error("{0}")]
    OutOfBounds(String),
}

impl Error {
    pub(crate) fn io(path: impl AsRef<Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().to_path_buf(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
