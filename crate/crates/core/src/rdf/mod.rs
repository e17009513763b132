//! RDF terms, triples, timestamped stream events and their serialisations.

mod event;
pub mod ntriples;
mod term;
pub mod vocab;
pub mod wire;

pub use event::{GraphEvent, StreamEvent, TimestampedTriple};
pub use ntriples::{parse_ntriple, serialize_ntriple};
pub use term::{Literal, Term, TermKind, Triple};
pub use wire::{decode_event, encode_event};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RdfError {
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("invalid term: {0}")]
    InvalidTerm(String),
    #[error("invalid event: {0}")]
    InvalidEvent(String),
    #[error("missing field {0:?}")]
    MissingField(String),
    #[error("decode error: {0}")]
    Decode(String),
}
