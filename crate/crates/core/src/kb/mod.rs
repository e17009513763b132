//! Background knowledge base: indexed triple store, entailment closures,
//! used-triple extraction and a network query service.

mod closure;
mod extract;
mod pattern;
mod sameas;
pub mod service;
mod store;

pub use extract::{extract_used_kb, UsageTracker};
pub use pattern::{PatternTerm, TriplePattern};
pub use service::{serve, ServiceHandle};
pub use store::TripleStore;

use thiserror::Error;

use crate::rdf::RdfError;

#[derive(Debug, Error)]
pub enum KbError {
    #[error("line {line}: {source}")]
    Parse { line: usize, source: RdfError },
    #[error("io: {0}")]
    Io(String),
    #[error("bind {addr}: {msg}")]
    Bind { addr: String, msg: String },
}
