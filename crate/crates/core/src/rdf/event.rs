use super::{RdfError, Triple};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TimestampedTriple {
    pub triple: Triple,
    /// Milliseconds since the Unix epoch.
    pub ts: i64,
}

impl TimestampedTriple {
    pub fn new(triple: Triple, ts: i64) -> Self {
        TimestampedTriple { triple, ts }
    }
}

/// A stream element made of several triples sharing one graph context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphEvent {
    graph_id: String,
    triples: Vec<TimestampedTriple>,
    event_ts: i64,
}

impl GraphEvent {
    /// Builds an event; `event_ts` is the maximum member timestamp.
    pub fn new(graph_id: impl Into<String>, triples: Vec<TimestampedTriple>) -> Result<Self, RdfError> {
        let graph_id = graph_id.into();
        let event_ts = triples
            .iter()
            .map(|t| t.ts)
            .max()
            .ok_or_else(|| RdfError::InvalidEvent(format!("graph {graph_id} has no triples")))?;
        for t in &triples {
            if t.ts < 0 {
                return Err(RdfError::InvalidEvent(format!("negative timestamp {}", t.ts)));
            }
            t.triple.validate()?;
        }
        Ok(GraphEvent { graph_id, triples, event_ts })
    }

    /// Every triple carries the same timestamp.
    pub fn stamped(graph_id: impl Into<String>, triples: Vec<Triple>, ts: i64) -> Result<Self, RdfError> {
        Self::new(graph_id, triples.into_iter().map(|t| TimestampedTriple::new(t, ts)).collect())
    }

    /// Wraps a single timestamped triple; used when a triple stream feeds a
    /// graph-oriented aggregator.
    pub fn from_triple(graph_id: impl Into<String>, t: TimestampedTriple) -> Result<Self, RdfError> {
        Self::new(graph_id, vec![t])
    }

    pub fn graph_id(&self) -> &str {
        &self.graph_id
    }

    pub fn triples(&self) -> &[TimestampedTriple] {
        &self.triples
    }

    pub fn event_ts(&self) -> i64 {
        self.event_ts
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }
}

/// Either of the two stream event shapes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StreamEvent {
    Triple(TimestampedTriple),
    Graph(GraphEvent),
}

impl StreamEvent {
    pub fn ts(&self) -> i64 {
        match self {
            StreamEvent::Triple(t) => t.ts,
            StreamEvent::Graph(g) => g.event_ts(),
        }
    }
}

impl From<GraphEvent> for StreamEvent {
    fn from(g: GraphEvent) -> Self {
        StreamEvent::Graph(g)
    }
}

impl From<TimestampedTriple> for StreamEvent {
    fn from(t: TimestampedTriple) -> Self {
        StreamEvent::Triple(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::Term;

    fn t(ts: i64) -> TimestampedTriple {
        TimestampedTriple::new(Triple::new(Term::iri("http://s"), Term::iri("http://p"), Term::literal("o")), ts)
    }

    #[test]
    fn event_ts_is_max() {
        let e = GraphEvent::new("g", vec![t(3), t(9), t(5)]).unwrap();
        assert_eq!(e.event_ts(), 9);
    }

    #[test]
    fn empty_event_rejected() {
        assert!(GraphEvent::new("g", vec![]).is_err());
        assert!(GraphEvent::new("g", vec![t(-1)]).is_err());
    }
}
