//! Descriptive features: schema, encoding, clustering and corpus analyses.

pub mod analysis;
pub mod kmeans;
pub mod profile;
pub mod vocab;

pub use analysis::{
    classify_edit, edit_breakdown, length_stats, top_toxic_keywords, Distribution, EditBreakdown, EditClass,
    LengthStats,
};
pub use kmeans::{
    assign_cluster, characterize_clusters, fit_kmeans, project_2d, sweep, ClusterFeatures, ClusterModel, Exemplar,
    KMeansConfig, RankedKeyword,
};
pub use profile::{
    decode_toxicity, encode_profile, load_profiles, parse_profiles, profiles_to_jsonl, Block, EncodedProfile,
    FeatureProfile, ToxicityLevel,
};
pub use vocab::{KeywordVocabulary, KEYWORDS};

#[derive(Debug, thiserror::Error)]
pub enum FeatureError {
    #[error("keyword `{keyword}` in {field} is not in the vocabulary")]
    OutOfVocabulary { field: &'static str, keyword: String },
    #[error("{0} has no keywords")]
    EmptyBlock(&'static str),
    #[error("unknown toxicity level `{0}` (expected Low, Medium or High)")]
    BadToxicityLevel(String),
    #[error("k must be at least 1, got {0}")]
    InvalidK(usize),
    #[error("{points} point(s) cannot fill {k} clusters")]
    TooFewPoints { points: usize, k: usize },
    #[error("vector dimension {got}, expected {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("duplicate sentence id {0}")]
    DuplicateId(String),
    #[error("cluster {cluster} out of range for k = {k}")]
    UnknownCluster { cluster: usize, k: usize },
    #[error("no input pairs")]
    EmptyInput,
    #[error("no pair differs from its reference")]
    NoEdits,
    #[error("line {line}: {message}")]
    Record { line: usize, message: String },
    #[error("{0}")]
    Io(String),
}
