use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty sequence")]
    EmptySequence,
    #[error("unknown residue code `{0}`")]
    UnknownResidue(String),
    #[error("no template for residue `{0}`")]
    NoTemplate(String),
    #[error("residue {residue} ({name}) is missing backbone atom {atom}")]
    MissingBackbone {
        residue: usize,
        name: String,
        atom: &'static str,
    },
    #[error("axis is not a unit vector (norm {0})")]
    NonUnitAxis(f64),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite coordinate for atom {0}")]
    NonFinite(usize),
    #[error("atoms {i} and {j} are {d:e} Å apart")]
    DistanceUnderflow { i: usize, j: usize, d: f64 },
    #[error("bond graph is disconnected: atom {0} unreachable from the root")]
    Disconnected(usize),
    #[error("identical atom indices {0} passed to classify")]
    SameAtom(usize),
    #[error("configuration: {0}")]
    Config(String),
    #[error("{file}:{line}: {msg}")]
    Parse {
        file: String,
        line: usize,
        msg: String,
    },
    #[error("structure is empty")]
    EmptyStructure,
    #[error("no unfrozen joints")]
    NoFreeJoints,
    #[error("joint index {0} out of range")]
    JointOutOfRange(usize),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("iteration {iteration}: {source}")]
    AtIteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(file: &str, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            file: file.to_string(),
            line,
            msg: msg.into(),
        }
    }
}
