//! Syntactic fragments of multi-sorted first-order logic and computable
//! many-one reductions between fragments of theories of fields, function
//! fields and valued fields, with finite-model and 𝔽_p(s) oracles.

pub mod corpus;
mod error;
pub mod ffred;
pub mod formula;
pub mod fpalg;
pub mod fragments;
pub mod models;
pub mod pcoding;
pub mod redgraph;
pub mod signature;
pub mod vfred;

pub use error::{Error, ReductionError};
