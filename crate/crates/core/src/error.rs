use crate::corpus::Subset;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("alphabet needs at least {min} distinct characters, got {got}")]
    AlphabetTooSmall { got: usize, min: usize },

    #[error("duplicate character {0:?} in alphabet")]
    DuplicateAlphabetChar(char),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid confusion model: {0}")]
    InvalidModel(String),

    #[error("no aligned pairs to estimate from")]
    EmptyPairs,

    #[error("vocabulary subset {0} is empty")]
    EmptySubset(Subset),

    #[error("reference token sequence is empty")]
    EmptyReference,

    #[error("exhaustive enumeration needs {terms} terms, limit is {limit}")]
    EnumerationTooLarge { terms: u128, limit: u128 },

    #[error("duplicate document id {0:?}")]
    DuplicateDocumentId(String),

    #[error("corpus error: {0}")]
    Corpus(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
