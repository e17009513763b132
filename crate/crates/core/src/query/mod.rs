//! Continuous-query language: a SPARQL subset with property paths, OPTIONAL,
//! UNION, FILTER, SERVICE and COUNT/AVG grouping.

mod ast;
mod lexer;
mod parser;
mod print;

pub use ast::*;
pub use parser::parse_query;
pub use print::to_query_string;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QueryError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unknown prefix {prefix:?} at {line}:{col}")]
    UnknownPrefix { prefix: String, line: usize, col: usize },
    #[error("path length {len} exceeds 3 at {line}:{col}")]
    PathLength { len: usize, line: usize, col: usize },
    #[error("invalid query: {0}")]
    Invalid(String),
}

/// Variables bindable by evaluating the query body.
pub fn free_variables(q: &Query) -> std::collections::BTreeSet<String> {
    q.free_variables()
}
