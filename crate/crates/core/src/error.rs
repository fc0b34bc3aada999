use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid knot embedding {id}: {reason}")]
    InvalidEmbedding { id: String, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("projection direction is not generic: {0}")]
    NonGenericProjection(String),

    #[error("segments {0} and {1} intersect")]
    SelfIntersection(usize, usize),

    #[error("invalid distance matrix: {0}")]
    InvalidDistanceMatrix(String),

    #[error("{0}")]
    Undefined(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("missing input file {}", .0.display())]
    MissingInput(PathBuf),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    /// Whether the error stems from bad input data rather than a bug or the environment.
    pub fn is_data_error(&self) -> bool {
        match self {
            Error::Io { .. } => false,
            Error::Stage { source, .. } => source.is_data_error(),
            _ => true,
        }
    }
}
