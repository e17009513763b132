use std::cell::RefCell;
use std::collections::HashSet;

use crate::engine::{evaluate_tracked, EngineError, Window};
use crate::query::Query;
use crate::rdf::Triple;

use super::TripleStore;

/// Collects the KB triples an evaluation looked at.
#[derive(Debug, Default)]
pub struct UsageTracker {
    triples: HashSet<Triple>,
}

impl UsageTracker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, t: Triple) {
        self.triples.insert(t);
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.triples.contains(t)
    }

    pub fn into_triples(self) -> Vec<Triple> {
        let mut v: Vec<Triple> = self.triples.into_iter().collect();
        v.sort();
        v
    }
}

/// The part of `store` that evaluating `query` over every window of
/// `sample` actually touched: every triple an index lookup returned, plus the
/// subclass edges behind each entailment that was used. Re-evaluating on the
/// result gives the same answers for that sample.
pub fn extract_used_kb(store: &TripleStore, query: &Query, sample: &[Window]) -> Result<TripleStore, EngineError> {
    let tracker = RefCell::new(UsageTracker::new());
    for w in sample {
        evaluate_tracked(query, w, store, &tracker)?;
    }
    Ok(TripleStore::from_triples(tracker.into_inner().into_triples()))
}
