use thiserror::Error;

use crate::graph::{Edge, VertexId};

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by the library.
#[derive(Error, Debug)]
pub enum Error {
    #[error("edge not present: {0}")]
    EdgeNotPresent(Edge),
    #[error("vertex {0} is not in the graph")]
    UnknownVertex(VertexId),
    #[error("self-loops are not allowed (vertex {0})")]
    SelfLoop(VertexId),
    #[error("vertex {vertex} has degree {degree}, expected 2")]
    NotDegreeTwo { vertex: VertexId, degree: usize },
    #[error("vertex {0} carries a taxon label")]
    LabelledVertex(VertexId),
    #[error("cannot contract edge {0}: both endpoints carry taxon labels")]
    BothLabelled(Edge),
    #[error("taxon label {0:?} is used more than once")]
    DuplicateLabel(String),
    #[error("newick parse error at byte {pos}: {msg}")]
    Newick { pos: usize, msg: String },
    #[error("not unrooted binary: {0}")]
    NotBinary(String),
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("invalid network: {0}")]
    InvalidNetwork(String),
    #[error("taxon sets differ (only in first: {only_first:?}; only in second: {only_second:?})")]
    TaxaMismatch {
        only_first: Vec<String>,
        only_second: Vec<String>,
    },
    #[error("need at least {needed} taxa, got {found}")]
    TooFewTaxa { needed: usize, found: usize },
    #[error("size limit exceeded for {what}: {actual} > {limit}")]
    SizeLimit {
        what: &'static str,
        limit: usize,
        actual: usize,
    },
    #[error("treewidth bounds did not meet: {lower} <= tw <= {upper}")]
    Inexact { lower: usize, upper: usize },
    #[error("normalization requires incompatibility")]
    Compatible,
    #[error("nothing to reduce")]
    NothingToReduce,
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("not a common chain: {0}")]
    NotCommonChain(String),
    #[error("not a common split: {0}")]
    NotCommonSplit(String),
    #[error("chain not found in display graph: {0}")]
    ChainNotFound(String),
    #[error("invalid character: {0}")]
    InvalidCharacter(String),
    #[error("not a partition of the taxa: {0}")]
    NotAPartition(String),
    #[error("invalid certificate: {0}")]
    InvalidCertificate(String),
    #[error("network does not display the tree")]
    NotDisplayed,
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by a configured size limit.
    pub fn is_size_limit(&self) -> bool {
        matches!(self, Error::SizeLimit { .. } | Error::Inexact { .. })
    }
}
