use std::path::PathBuf;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("dangling reference(s): {}", .0.join(", "))]
    DanglingReference(Vec<String>),
    #[error("is_a cycle detected: {}", .0.join(" -> "))]
    Cycle(Vec<String>),
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("integrity error, unknown terms referenced: {}", .0.join(", "))]
    Integrity(Vec<String>),
    #[error("lookup error: {0} is not a node of the graph")]
    Lookup(String),
    #[error("degenerate ontology: {0}")]
    DegenerateOntology(String),
    #[error("empty annotation corpus")]
    EmptyCorpus,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("training diverged at epoch {epoch} (learning rate {learning_rate})")]
    Divergence { epoch: usize, learning_rate: f64 },
    #[error("degenerate corpus: {0}")]
    DegenerateCorpus(String),
    #[error("cosine similarity undefined for a zero vector")]
    UndefinedSimilarity,
    #[error("degenerate training data: {0}")]
    DegenerateTraining(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("fold construction error: {0}")]
    FoldConstruction(String),
    #[error("negative sampling infeasible: {required} negatives required, only {available} candidate pairs")]
    Infeasible { required: usize, available: usize },
    #[error("stratification error: {0}")]
    Stratification(String),
    #[error("AUC undefined: {0}")]
    UndefinedAuc(String),
    #[error("dataset has no train/test split")]
    MissingSplit,
    #[error("stage dependency missing: {}", .0.display())]
    StageDependency(PathBuf),
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Wrap the error with file (or other) context.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
