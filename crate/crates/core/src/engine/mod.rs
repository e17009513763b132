//! Per-window continuous query evaluation against the window and a
//! background KB, either merged locally or reached through SERVICE calls.

mod aggregate;
mod dataset;
mod eval;
mod filter;
mod path;
mod service_client;
mod solution;

pub use aggregate::aggregate;
pub use dataset::Dataset;
pub use eval::{eval_bgp, Evaluator, NoService, ServiceBackend};
pub use filter::{eval_filter, numeric_value};
pub use path::PATH_BFS_LIMIT;
pub use service_client::ServiceClients;
pub use solution::Solution;

pub use crate::operator::Window;

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::kb::{KbError, PatternTerm, TripleStore, UsageTracker};
use crate::query::{PatternExpr, Query, QueryForm};
use crate::rdf::{Term, Triple};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("service {endpoint}: {msg}")]
    Service { endpoint: String, msg: String },
    #[error("knowledge base: {0}")]
    Kb(#[from] KbError),
    #[error("KB access mode: {0}")]
    Mode(String),
}

/// A KB merged into every window. With `reload_per_window` the N-Triples
/// source is parsed and indexed again for each window, so per-window cost
/// grows with the whole KB the way a file-backed background graph does.
#[derive(Debug, Clone)]
pub struct LocalKb {
    store: Arc<TripleStore>,
    source: Option<Arc<str>>,
    reload_per_window: bool,
}

impl LocalKb {
    pub fn new(store: Arc<TripleStore>) -> Self {
        LocalKb { store, source: None, reload_per_window: false }
    }

    /// Parses (and sameAs-canonicalises) the text once up front.
    pub fn from_ntriples(text: impl Into<Arc<str>>, reload_per_window: bool) -> Result<Self, KbError> {
        let text = text.into();
        let store = Arc::new(TripleStore::load_canonical(&text)?);
        Ok(LocalKb { store, source: Some(text), reload_per_window })
    }

    pub fn store(&self) -> &Arc<TripleStore> {
        &self.store
    }

    pub fn reloads_per_window(&self) -> bool {
        self.reload_per_window && self.source.is_some()
    }

    fn for_window(&self) -> Result<Arc<TripleStore>, KbError> {
        match (&self.source, self.reload_per_window) {
            (Some(text), true) => Ok(Arc::new(TripleStore::load_canonical(text)?)),
            _ => Ok(self.store.clone()),
        }
    }
}

#[derive(Debug, Clone)]
pub enum KbAccessMode {
    /// Stream only.
    None,
    LocalMerge(LocalKb),
    /// SERVICE endpoint name to `host:port`.
    RemoteService(BTreeMap<String, String>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum QueryOutput {
    /// Projected (and aggregated) rows of a SELECT.
    Solutions(Vec<Solution>),
    /// One ground triple group per solution of a CONSTRUCT.
    Construct(Vec<Vec<Triple>>),
}

#[derive(Debug, Clone)]
pub struct WindowResult {
    pub window_seq: u64,
    pub output: QueryOutput,
    pub eval_millis: f64,
    pub kb_triples_touched: u64,
}

pub const ROW_PREFIX: &str = "urn:dscep:row:";
pub const VAR_PREFIX: &str = "urn:dscep:var:";

impl WindowResult {
    /// The result as triple groups, ready to publish. A SELECT row becomes
    /// `<urn:dscep:row:H> <urn:dscep:var:NAME> value` triples, H hashing the
    /// row content.
    pub fn output_groups(&self) -> Vec<Vec<Triple>> {
        match &self.output {
            QueryOutput::Construct(groups) => groups.clone(),
            QueryOutput::Solutions(rows) => rows.iter().filter(|r| !r.is_empty()).map(row_triples).collect(),
        }
    }

    pub fn len(&self) -> usize {
        match &self.output {
            QueryOutput::Construct(g) => g.len(),
            QueryOutput::Solutions(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn row_triples(row: &Solution) -> Vec<Triple> {
    let digest = Sha256::digest(row.to_string().as_bytes());
    let subject = Term::iri(format!("{ROW_PREFIX}{}", hex::encode(&digest[..16])));
    row.iter()
        .map(|(var, t)| Triple::new(subject.clone(), Term::iri(format!("{VAR_PREFIX}{var}")), t.clone()))
        .collect()
}

/// Instantiates the template once per solution; a group with an unbound
/// variable, or one that would put a literal in subject position, is dropped.
pub fn construct_output(q: &Query, solutions: &[Solution]) -> Vec<Vec<Triple>> {
    let QueryForm::Construct(template) = &q.form else { return Vec::new() };
    let inst = |p: &PatternTerm, row: &Solution| -> Option<Term> {
        match p {
            PatternTerm::Term(t) => Some(t.clone()),
            PatternTerm::Var(v) => row.get(v).cloned(),
        }
    };
    solutions
        .iter()
        .filter_map(|row| {
            template
                .iter()
                .map(|p| {
                    let t = Triple::new(inst(&p.s, row)?, inst(&p.p, row)?, inst(&p.o, row)?);
                    t.validate().ok().map(|_| t)
                })
                .collect::<Option<Vec<Triple>>>()
        })
        .collect()
}

/// Recursive algebra evaluation of one pattern over a dataset.
pub fn eval_pattern(expr: &PatternExpr, ds: &Dataset<'_>, seed: &Solution) -> Result<Vec<Solution>, EngineError> {
    Evaluator::new(ds, &mut NoService).eval(expr, seed)
}

fn finish(q: &Query, rows: Vec<Solution>) -> QueryOutput {
    let rows = match &q.group_by {
        Some(g) => aggregate(&rows, g),
        None => rows,
    };
    match &q.form {
        QueryForm::Select(vars) => QueryOutput::Solutions(rows.iter().map(|r| r.project(vars)).collect()),
        QueryForm::Construct(_) => QueryOutput::Construct(construct_output(q, &rows)),
    }
}

fn empty_output(q: &Query) -> QueryOutput {
    match q.form {
        QueryForm::Select(_) => QueryOutput::Solutions(Vec::new()),
        QueryForm::Construct(_) => QueryOutput::Construct(Vec::new()),
    }
}

/// One query bound to one KB access mode; evaluates windows one at a time.
pub struct Engine {
    query: Arc<Query>,
    kb: KbAccessMode,
    services: ServiceClients,
}

impl Engine {
    pub fn new(query: Arc<Query>, kb: KbAccessMode) -> Result<Self, EngineError> {
        let endpoints = query.body.service_endpoints();
        let services = match &kb {
            KbAccessMode::RemoteService(map) => {
                if let Some(missing) = endpoints.iter().find(|e| !map.contains_key(*e)) {
                    return Err(EngineError::Mode(format!("SERVICE <{missing}> has no configured address")));
                }
                ServiceClients::new(map.clone())
            }
            _ => {
                if let Some(e) = endpoints.first() {
                    return Err(EngineError::Mode(format!("query uses SERVICE <{e}> but the mode is not remote")));
                }
                ServiceClients::new(BTreeMap::new())
            }
        };
        Ok(Engine { query, kb, services })
    }

    pub fn query(&self) -> &Query {
        &self.query
    }

    pub fn evaluate(&mut self, w: &Window) -> Result<WindowResult, EngineError> {
        let start = Instant::now();
        if w.is_empty() {
            return Ok(WindowResult { window_seq: w.seq, output: empty_output(&self.query), eval_millis: 0.0, kb_triples_touched: 0 });
        }
        let (output, touched) = match &self.kb {
            KbAccessMode::LocalMerge(local) => {
                let store = local.for_window()?;
                let ds = Dataset::from_window(w, Some(&store));
                let rows = Evaluator::new(&ds, &mut NoService).eval(&self.query.body, &Solution::new())?;
                (finish(&self.query, rows), ds.kb_triples_touched())
            }
            KbAccessMode::None => {
                let ds = Dataset::from_window(w, None);
                let rows = Evaluator::new(&ds, &mut NoService).eval(&self.query.body, &Solution::new())?;
                (finish(&self.query, rows), 0)
            }
            KbAccessMode::RemoteService(_) => {
                let ds = Dataset::from_window(w, None);
                let mut ev = Evaluator::new(&ds, &mut self.services);
                let rows = ev.eval(&self.query.body, &Solution::new())?;
                let received = ev.service_rows();
                (finish(&self.query, rows), received)
            }
        };
        Ok(WindowResult {
            window_seq: w.seq,
            output,
            eval_millis: start.elapsed().as_secs_f64() * 1000.0,
            kb_triples_touched: touched,
        })
    }
}

/// Evaluates `q` over one window. Opens fresh service connections each call;
/// keep an [`Engine`] around for a window sequence.
pub fn evaluate_window(q: &Query, w: &Window, kb: &KbAccessMode) -> Result<WindowResult, EngineError> {
    Engine::new(Arc::new(q.clone()), kb.clone())?.evaluate(w)
}

/// Local-merge evaluation that records every KB triple it touches.
pub fn evaluate_tracked(
    q: &Query,
    w: &Window,
    store: &TripleStore,
    tracker: &RefCell<UsageTracker>,
) -> Result<QueryOutput, EngineError> {
    if q.body.contains_service() {
        return Err(EngineError::Mode("usage tracking needs a local-merge query".into()));
    }
    if w.is_empty() {
        return Ok(empty_output(q));
    }
    let ds = Dataset::from_window(w, Some(store)).with_tracker(tracker);
    let rows = Evaluator::new(&ds, &mut NoService).eval(&q.body, &Solution::new())?;
    Ok(finish(q, rows))
}
