use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid item: {0}")]
    InvalidItem(String),

    #[error("cannot parse item `{0}`")]
    ParseItem(String),

    #[error("invalid binning for `{feature}`: {reason}")]
    InvalidBinning { feature: String, reason: String },

    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    #[error("column `{column}`: {reason}")]
    Encode { column: String, reason: String },

    #[error("{instances} instances but {labels} labels")]
    LengthMismatch { instances: usize, labels: usize },

    #[error("label `{0}` is not in the class list")]
    UnknownLabel(String),

    #[error("unknown class index {0}")]
    UnknownClass(usize),

    #[error("confidence is undefined for an itemset that occurs in no instance")]
    UndefinedConfidence,

    #[error("fidelity is undefined for class `{0}` with no instances")]
    UndefinedFidelity(String),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("invalid mining config: {0}")]
    InvalidMiningConfig(String),

    #[error("invalid objective config: {0}")]
    InvalidObjectiveConfig(String),

    #[error("instance does not match the store schema: {0}")]
    SchemaMismatch(String),

    #[error("class `{0}` has no candidate itemsets")]
    NoCandidates(String),

    #[error("class `{class}`: no single itemset satisfies the constraints (smallest itemset has {min_len} items, theta = {theta:?})")]
    NoFeasibleSingleton {
        class: String,
        min_len: usize,
        theta: [usize; 3],
    },

    #[error("invalid selection: {0}")]
    InvalidSelection(String),

    #[error("weight grid is empty")]
    EmptyGrid,

    #[error("cross-validation needs at least 2 folds and as many instances, got {folds} folds over {instances} instances")]
    InvalidFolds { folds: usize, instances: usize },
}
