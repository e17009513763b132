//! JSON wire encoding of stream events.
//!
//! Triple event: `{"s":{"k":"iri","v":"..."},"p":{..},"o":{..},"ts":123}`
//! Graph event:  `{"graph":"<id>","ets":123,"triples":[{"s":..,"p":..,"o":..,"ts":..}, ..]}`
//!
//! Term objects use `k` in {`iri`, `bnode`, `lit`}, `v` for the value and the
//! optional `dt` / `lang` keys for literals.

use serde::{Deserialize, Serialize};

use super::{GraphEvent, Literal, RdfError, StreamEvent, Term, TimestampedTriple, Triple};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireTerm {
    pub k: String,
    pub v: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lang: Option<String>,
}

impl From<&Term> for WireTerm {
    fn from(t: &Term) -> Self {
        match t {
            Term::Iri(v) => WireTerm { k: "iri".into(), v: v.clone(), dt: None, lang: None },
            Term::Blank(v) => WireTerm { k: "bnode".into(), v: v.clone(), dt: None, lang: None },
            Term::Literal(l) => WireTerm {
                k: "lit".into(),
                v: l.lexical().to_string(),
                dt: l.datatype().map(str::to_string),
                lang: l.language().map(str::to_string),
            },
        }
    }
}

impl WireTerm {
    pub fn to_term(&self) -> Result<Term, RdfError> {
        let term = match self.k.as_str() {
            "iri" => Term::Iri(self.v.clone()),
            "bnode" => Term::Blank(self.v.clone()),
            "lit" => match (&self.dt, &self.lang) {
                (Some(_), Some(_)) => {
                    return Err(RdfError::Decode("literal has both dt and lang".into()))
                }
                (Some(dt), None) => Term::Literal(Literal::typed(self.v.clone(), dt.clone())),
                (None, Some(lang)) => Term::Literal(Literal::lang(self.v.clone(), lang.clone())),
                (None, None) => Term::Literal(Literal::plain(self.v.clone())),
            },
            other => return Err(RdfError::Decode(format!("unknown term kind {other:?}"))),
        };
        term.validate()?;
        Ok(term)
    }
}

#[derive(Serialize)]
struct TripleOut {
    s: WireTerm,
    p: WireTerm,
    o: WireTerm,
    ts: i64,
}

impl From<&TimestampedTriple> for TripleOut {
    fn from(t: &TimestampedTriple) -> Self {
        TripleOut {
            s: (&t.triple.s).into(),
            p: (&t.triple.p).into(),
            o: (&t.triple.o).into(),
            ts: t.ts,
        }
    }
}

#[derive(Serialize)]
struct GraphOut<'a> {
    graph: &'a str,
    ets: i64,
    triples: Vec<TripleOut>,
}

/// Input shape shared by both event kinds; every field optional so that a
/// missing one can be reported by name.
#[derive(Debug, Deserialize)]
pub struct WireEventIn {
    s: Option<WireTerm>,
    p: Option<WireTerm>,
    o: Option<WireTerm>,
    ts: Option<i64>,
    graph: Option<String>,
    ets: Option<i64>,
    triples: Option<Vec<WireTripleIn>>,
}

#[derive(Debug, Deserialize)]
pub struct WireTripleIn {
    s: Option<WireTerm>,
    p: Option<WireTerm>,
    o: Option<WireTerm>,
    ts: Option<i64>,
}

fn required<T>(v: Option<T>, name: &str) -> Result<T, RdfError> {
    v.ok_or_else(|| RdfError::MissingField(name.to_string()))
}

impl WireTripleIn {
    fn into_triple(self) -> Result<TimestampedTriple, RdfError> {
        let s = required(self.s, "s")?.to_term()?;
        let p = required(self.p, "p")?.to_term()?;
        let o = required(self.o, "o")?.to_term()?;
        let ts = required(self.ts, "ts")?;
        let triple = Triple::new(s, p, o);
        triple.validate()?;
        if ts < 0 {
            return Err(RdfError::InvalidEvent(format!("negative timestamp {ts}")));
        }
        Ok(TimestampedTriple::new(triple, ts))
    }
}

impl WireEventIn {
    pub fn into_event(self) -> Result<StreamEvent, RdfError> {
        if let Some(graph) = self.graph {
            let triples = required(self.triples, "triples")?
                .into_iter()
                .map(WireTripleIn::into_triple)
                .collect::<Result<Vec<_>, _>>()?;
            let event = GraphEvent::new(graph, triples)?;
            if let Some(ets) = self.ets {
                if ets != event.event_ts() {
                    return Err(RdfError::Decode(format!(
                        "event_ts mismatch: carried {ets}, max triple ts {}",
                        event.event_ts()
                    )));
                }
            }
            return Ok(StreamEvent::Graph(event));
        }
        let t = WireTripleIn { s: self.s, p: self.p, o: self.o, ts: self.ts }.into_triple()?;
        Ok(StreamEvent::Triple(t))
    }
}

pub fn encode_triple_event(t: &TimestampedTriple) -> Vec<u8> {
    serde_json::to_vec(&TripleOut::from(t)).expect("triple event serialises")
}

pub fn encode_graph_event(e: &GraphEvent) -> Vec<u8> {
    serde_json::to_vec(&graph_out(e)).expect("graph event serialises")
}

fn graph_out(e: &GraphEvent) -> GraphOut<'_> {
    GraphOut {
        graph: e.graph_id(),
        ets: e.event_ts(),
        triples: e.triples().iter().map(TripleOut::from).collect(),
    }
}

/// JSON value form of a graph event, for embedding inside larger payloads.
pub fn graph_event_value(e: &GraphEvent) -> serde_json::Value {
    serde_json::to_value(graph_out(e)).expect("graph event serialises")
}

pub fn encode_event(e: &StreamEvent) -> Vec<u8> {
    match e {
        StreamEvent::Triple(t) => encode_triple_event(t),
        StreamEvent::Graph(g) => encode_graph_event(g),
    }
}

pub fn decode_event(bytes: &[u8]) -> Result<StreamEvent, RdfError> {
    let raw: WireEventIn =
        serde_json::from_slice(bytes).map_err(|e| RdfError::Decode(e.to_string()))?;
    raw.into_event()
}
