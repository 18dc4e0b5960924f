use crate::formula::{FormulaError, ParseError};
use crate::fpalg::{FpError, SearchError};
use crate::fragments::FragmentError;
use crate::models::ModelError;
use crate::redgraph::GraphError;
use crate::signature::{GodelError, SignatureError};

/// Failure of a reduction map: bad parameters, an input outside the source
/// fragment, or an unmet (syntactic or asserted) hypothesis.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReductionError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("unsupported fragment: {0}")]
    Fragment(String),
    #[error("input not in {0}")]
    NotInFragment(String),
    #[error("language: {0}")]
    Language(String),
    #[error("hypothesis not asserted: {0}")]
    Hypothesis(String),
    #[error(transparent)]
    Fragments(#[from] FragmentError),
    #[error(transparent)]
    Signature(#[from] SignatureError),
}

/// Any error raised by the library.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error(transparent)]
    Godel(#[from] GodelError),
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Fragment(#[from] FragmentError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Arithmetic(#[from] FpError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}
