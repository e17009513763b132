use serde::{Deserialize, Serialize};

use crate::rdf::wire::{graph_event_value, WireEventIn};
use crate::rdf::{GraphEvent, RdfError, StreamEvent, Triple};

/// An ordered batch of whole graph events; the unit handed to one engine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    pub seq: u64,
    pub events: Vec<GraphEvent>,
    pub triple_count: usize,
    pub low_ts: i64,
    pub high_ts: i64,
}

impl Window {
    /// `events` must be in timestamp order.
    pub fn new(seq: u64, events: Vec<GraphEvent>) -> Self {
        let triple_count = events.iter().map(GraphEvent::len).sum();
        let low_ts = events.first().map_or(0, GraphEvent::event_ts);
        let high_ts = events.last().map_or(0, GraphEvent::event_ts);
        Window { seq, events, triple_count, low_ts, high_ts }
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn triples(&self) -> impl Iterator<Item = &Triple> {
        self.events.iter().flat_map(|e| e.triples().iter().map(|t| &t.triple))
    }

    /// `{"window":seq,"low":..,"high":..,"triples":n,"events":[graph events]}`
    pub fn encode(&self) -> Vec<u8> {
        let out = WindowOut {
            window: self.seq,
            low: self.low_ts,
            high: self.high_ts,
            triples: self.triple_count,
            events: self.events.iter().map(graph_event_value).collect(),
        };
        serde_json::to_vec(&out).expect("window serialises")
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, RdfError> {
        let raw: WindowIn = serde_json::from_slice(bytes).map_err(|e| RdfError::Decode(e.to_string()))?;
        let events = raw
            .events
            .into_iter()
            .map(|e| match e.into_event()? {
                StreamEvent::Graph(g) => Ok(g),
                StreamEvent::Triple(_) => Err(RdfError::Decode("window holds a bare triple".into())),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let w = Window::new(raw.window, events);
        if w.triple_count != raw.triples || w.low_ts != raw.low || w.high_ts != raw.high {
            return Err(RdfError::Decode(format!("window {} header disagrees with its events", raw.window)));
        }
        Ok(w)
    }
}

#[derive(Serialize)]
struct WindowOut {
    window: u64,
    low: i64,
    high: i64,
    triples: usize,
    events: Vec<serde_json::Value>,
}

#[derive(Deserialize)]
struct WindowIn {
    window: u64,
    low: i64,
    high: i64,
    triples: usize,
    events: Vec<WireEventIn>,
}

/// How an ordered event sequence is cut into windows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowKind {
    /// Greedy packing of whole events up to a triple cap. An event larger
    /// than the cap gets a window of its own.
    Count { max_triples: usize },
    /// Tumbling buckets `[k*w, (k+1)*w)` over event time.
    Time { width_ms: i64 },
}

impl Default for WindowKind {
    fn default() -> Self {
        WindowKind::Count { max_triples: 1000 }
    }
}

/// Incremental window cutter; numbers windows from 0.
#[derive(Debug)]
pub struct Windower {
    kind: WindowKind,
    next_seq: u64,
    current: Vec<GraphEvent>,
    current_triples: usize,
    bucket: i64,
}

impl Windower {
    pub fn new(kind: WindowKind) -> Self {
        Windower { kind, next_seq: 0, current: Vec::new(), current_triples: 0, bucket: 0 }
    }

    /// Adds the next event in order; returns the window it closed, if any.
    pub fn push(&mut self, event: GraphEvent) -> Option<Window> {
        let closes = !self.current.is_empty()
            && match self.kind {
                WindowKind::Count { max_triples } => self.current_triples + event.len() > max_triples,
                WindowKind::Time { width_ms } => event.event_ts().div_euclid(width_ms) != self.bucket,
            };
        let done = if closes { self.cut() } else { None };
        if let WindowKind::Time { width_ms } = self.kind {
            self.bucket = event.event_ts().div_euclid(width_ms);
        }
        self.current_triples += event.len();
        self.current.push(event);
        done
    }

    /// Closes the partial window at end of input.
    pub fn flush(&mut self) -> Option<Window> {
        self.cut()
    }

    fn cut(&mut self) -> Option<Window> {
        if self.current.is_empty() {
            return None;
        }
        let w = Window::new(self.next_seq, std::mem::take(&mut self.current));
        self.next_seq += 1;
        self.current_triples = 0;
        Some(w)
    }
}

/// Cuts a complete ordered sequence.
pub fn cut_windows(events: impl IntoIterator<Item = GraphEvent>, kind: WindowKind) -> Vec<Window> {
    let mut w = Windower::new(kind);
    let mut out: Vec<Window> = events.into_iter().filter_map(|e| w.push(e)).collect();
    out.extend(w.flush());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::Term;

    fn sized(ts: i64, n: usize) -> GraphEvent {
        let triples = (0..n)
            .map(|i| Triple::new(Term::iri("http://s"), Term::iri("http://p"), Term::literal(i.to_string())))
            .collect();
        GraphEvent::stamped(format!("g{ts}"), triples, ts).unwrap()
    }

    fn sizes(ws: &[Window]) -> Vec<Vec<usize>> {
        ws.iter().map(|w| w.events.iter().map(GraphEvent::len).collect()).collect()
    }

    #[test]
    fn count_windows_pack_greedily() {
        let ws = cut_windows([sized(1, 400), sized(2, 400), sized(3, 300)], WindowKind::Count { max_triples: 1000 });
        assert_eq!(sizes(&ws), [vec![400, 400], vec![300]]);
        assert_eq!(ws.iter().map(|w| w.seq).collect::<Vec<_>>(), [0, 1]);
    }

    #[test]
    fn oversize_event_alone() {
        let ws = cut_windows([sized(1, 1500)], WindowKind::Count { max_triples: 1000 });
        assert_eq!(sizes(&ws), [vec![1500]]);
        let ws = cut_windows([sized(1, 10), sized(2, 1500), sized(3, 10)], WindowKind::Count { max_triples: 1000 });
        assert_eq!(sizes(&ws), [vec![10], vec![1500], vec![10]]);
    }

    #[test]
    fn exact_fill() {
        let ws = cut_windows([sized(1, 500), sized(2, 500), sized(3, 1)], WindowKind::Count { max_triples: 1000 });
        assert_eq!(sizes(&ws), [vec![500, 500], vec![1]]);
    }

    #[test]
    fn time_buckets() {
        let ws = cut_windows([sized(1, 1), sized(9, 1), sized(11, 1)], WindowKind::Time { width_ms: 10 });
        let ts: Vec<Vec<i64>> = ws.iter().map(|w| w.events.iter().map(GraphEvent::event_ts).collect()).collect();
        assert_eq!(ts, [vec![1, 9], vec![11]]);
        assert_eq!((ws[0].low_ts, ws[0].high_ts), (1, 9));
    }

    #[test]
    fn empty_buckets_produce_nothing() {
        let ws = cut_windows([sized(1, 1), sized(55, 1)], WindowKind::Time { width_ms: 10 });
        assert_eq!(ws.len(), 2);
        assert_eq!(ws[1].seq, 1);
    }

    #[test]
    fn payload_roundtrip() {
        let t = Triple::new(Term::iri("http://s"), Term::iri("http://p"), Term::literal("o"));
        let w = Window::new(
            3,
            vec![GraphEvent::stamped("a", vec![t.clone()], 10).unwrap(), GraphEvent::stamped("b", vec![t.clone(), t], 12).unwrap()],
        );
        assert_eq!((w.triple_count, w.low_ts, w.high_ts), (3, 10, 12));
        assert_eq!(Window::decode(&w.encode()).unwrap(), w);
    }
}
