//! Distributed semantic complex event processing over timestamped RDF
//! streams.
//!
//! Streams of graph events pass through operators that merge their inputs,
//! cut windows, evaluate a continuous query against the window plus a
//! background knowledge base, and publish the constructed results for
//! downstream operators. Everything talks over a topic bus with consumer
//! groups, in process or over TCP.

pub mod bench;
pub mod bus;
pub mod engine;
pub mod kb;
pub mod operator;
pub mod query;
pub mod rdf;
pub mod streamgen;
