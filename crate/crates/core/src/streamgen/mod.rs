//! Synthetic tweet stream and companion knowledge base, plus paced replay.

mod generate;
mod replay;
pub mod vocab;

pub use generate::{generate, glossary, GenConfig, Generated};
pub use replay::{read_stream, replay, ReplayReport, StreamError, StreamLine};
