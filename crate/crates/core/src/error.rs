use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("row {row}: endpoint {node} out of range for {num_nodes} nodes")]
    EndpointOutOfRange {
        row: usize,
        node: usize,
        num_nodes: usize,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("requested {requested} proposal edges but only {available} are available")]
    ProposalTooShort { requested: usize, available: usize },

    #[error("starting set exceeds cap of {cap} pairs")]
    StartingSetTooLarge { cap: usize },

    #[error("cos-common scorer requires a feature matrix")]
    MissingFeatures,

    #[error("feature matrix has {rows} rows, graph has {num_nodes} nodes")]
    FeatureShape { rows: usize, num_nodes: usize },

    #[error("non-finite feature value at node {node}")]
    NonFiniteFeature { node: usize },

    #[error("cannot sample {requested} pairs: only {available} eligible")]
    InfeasibleSample { requested: usize, available: usize },

    #[error("edge {row} has no timestamp")]
    MissingTimestamp { row: usize },

    #[error("invalid split fractions {0:?}")]
    InvalidFractions([f64; 3]),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("hits@K needs at least one positive score")]
    EmptyPositives,

    #[error("embedding dimension {dim} exceeds node count {num_nodes}")]
    DimensionTooLarge { dim: usize, num_nodes: usize },

    #[error("no positive or no negative pair among {pairs} lies within one component")]
    AllPairsDisconnected { pairs: usize },

    #[error("empty target-size grid")]
    EmptyGrid,

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable identifier used in machine-readable CLI errors.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EndpointOutOfRange { .. } => "endpoint_out_of_range",
            Error::Parse { .. } => "parse",
            Error::ProposalTooShort { .. } => "proposal_too_short",
            Error::StartingSetTooLarge { .. } => "starting_set_too_large",
            Error::MissingFeatures => "missing_features",
            Error::FeatureShape { .. } => "feature_shape",
            Error::NonFiniteFeature { .. } => "non_finite_feature",
            Error::InfeasibleSample { .. } => "infeasible_sample",
            Error::MissingTimestamp { .. } => "missing_timestamp",
            Error::InvalidFractions(_) => "invalid_fractions",
            Error::InvalidConfig(_) => "invalid_config",
            Error::EmptyPositives => "empty_positives",
            Error::DimensionTooLarge { .. } => "dimension_too_large",
            Error::AllPairsDisconnected { .. } => "all_pairs_disconnected",
            Error::EmptyGrid => "empty_grid",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
