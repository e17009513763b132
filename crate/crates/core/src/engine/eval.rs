use std::collections::HashMap;
use std::rc::Rc;

use crate::kb::{PatternTerm, TriplePattern};
use crate::query::{PathPattern, PatternExpr};
use crate::rdf::Term;

use super::dataset::Dataset;
use super::filter::eval_filter;
use super::path::eval_path;
use super::{EngineError, Solution};

/// Answers SERVICE blocks; one call per block per window.
pub trait ServiceBackend {
    fn query(&mut self, endpoint: &str, patterns: &[TriplePattern]) -> Result<Vec<Solution>, EngineError>;
}

/// Backend for queries that must not reach a SERVICE node.
pub struct NoService;

impl ServiceBackend for NoService {
    fn query(&mut self, endpoint: &str, _: &[TriplePattern]) -> Result<Vec<Solution>, EngineError> {
        Err(EngineError::Service { endpoint: endpoint.to_string(), msg: "no service access configured".into() })
    }
}

/// Recursive algebra evaluator over one dataset.
///
/// Nodes for which seeding is exact (see `PatternExpr::is_seed_safe`) get the
/// caller's partial row pushed in; the rest are evaluated once per window
/// unseeded and joined.
pub struct Evaluator<'d, 'a, 'b> {
    ds: &'d Dataset<'a>,
    services: &'b mut dyn ServiceBackend,
    cache: HashMap<*const PatternExpr, Rc<Vec<Solution>>>,
    service_rows: u64,
}

impl<'d, 'a, 'b> Evaluator<'d, 'a, 'b> {
    pub fn new(ds: &'d Dataset<'a>, services: &'b mut dyn ServiceBackend) -> Self {
        Evaluator { ds, services, cache: HashMap::new(), service_rows: 0 }
    }

    /// Rows received from SERVICE calls so far.
    pub fn service_rows(&self) -> u64 {
        self.service_rows
    }

    pub fn eval(&mut self, e: &PatternExpr, seed: &Solution) -> Result<Vec<Solution>, EngineError> {
        if seed.is_empty() || e.is_seed_safe() {
            return self.eval_seeded(e, seed);
        }
        let rows = self.unseeded(e)?;
        Ok(rows.iter().filter_map(|r| seed.merge(r)).collect())
    }

    fn unseeded(&mut self, e: &PatternExpr) -> Result<Rc<Vec<Solution>>, EngineError> {
        let key = e as *const PatternExpr;
        if let Some(rows) = self.cache.get(&key) {
            return Ok(rows.clone());
        }
        let rows = Rc::new(self.eval_seeded(e, &Solution::new())?);
        self.cache.insert(key, rows.clone());
        Ok(rows)
    }

    fn eval_seeded(&mut self, e: &PatternExpr, seed: &Solution) -> Result<Vec<Solution>, EngineError> {
        match e {
            PatternExpr::Bgp(patterns) => Ok(eval_bgp(self.ds, patterns, seed)),
            PatternExpr::Path(p) => Ok(self.eval_path(p, seed)),
            PatternExpr::Service { endpoint, patterns } => {
                let key = e as *const PatternExpr;
                let rows = match self.cache.get(&key) {
                    Some(rows) => rows.clone(),
                    None => {
                        let rows = Rc::new(self.services.query(endpoint, patterns)?);
                        self.service_rows += rows.len() as u64;
                        self.cache.insert(key, rows.clone());
                        rows
                    }
                };
                Ok(rows.iter().filter_map(|r| seed.merge(r)).collect())
            }
            PatternExpr::Filter(f, child) => {
                let rows = self.eval(child, seed)?;
                Ok(rows.into_iter().filter(|r| eval_filter(f, r) == Some(true)).collect())
            }
            PatternExpr::Join(l, r) => {
                let left = self.eval(l, seed)?;
                let mut out = Vec::new();
                if r.is_seed_safe() {
                    for row in &left {
                        out.extend(self.eval_seeded(r, row)?);
                    }
                } else {
                    let right = self.unseeded(r)?;
                    for row in &left {
                        out.extend(right.iter().filter_map(|x| row.merge(x)));
                    }
                }
                Ok(out)
            }
            PatternExpr::Union(l, r) => {
                let mut out = self.eval(l, seed)?;
                out.extend(self.eval(r, seed)?);
                Ok(out)
            }
            PatternExpr::Optional(l, r) => {
                let left = self.eval(l, seed)?;
                // A filter directly inside OPTIONAL is the left-join condition
                // and sees the merged row.
                let (cond, inner) = match &**r {
                    PatternExpr::Filter(f, c) => (Some(f), &**c),
                    other => (None, other),
                };
                let mut out = Vec::new();
                let shared = if inner.is_seed_safe() { None } else { Some(self.unseeded(inner)?) };
                for row in left {
                    let candidates = match &shared {
                        Some(rows) => rows.iter().filter_map(|x| row.merge(x)).collect(),
                        None => self.eval_seeded(inner, &row)?,
                    };
                    let before = out.len();
                    out.extend(candidates.into_iter().filter(|m| cond.is_none_or(|f| eval_filter(f, m) == Some(true))));
                    if out.len() == before {
                        out.push(row);
                    }
                }
                Ok(out)
            }
        }
    }

    fn eval_path(&self, p: &PathPattern, seed: &Solution) -> Vec<Solution> {
        let resolve = |t: &PatternTerm| -> Option<Term> {
            match t {
                PatternTerm::Term(t) => Some(t.clone()),
                PatternTerm::Var(v) => seed.get(v).cloned(),
            }
        };
        let (s, o) = (resolve(&p.s), resolve(&p.o));
        let pairs = eval_path(self.ds, s.as_ref(), &p.steps, o.as_ref());
        let mut out = Vec::with_capacity(pairs.len());
        for (a, b) in pairs {
            let mut row = seed.clone();
            let ok = bind_position(&mut row, &p.s, &a) && bind_position(&mut row, &p.o, &b);
            if ok {
                out.push(row);
            }
        }
        out
    }
}

fn bind_position(row: &mut Solution, pos: &PatternTerm, t: &Term) -> bool {
    match pos {
        PatternTerm::Var(v) => row.bind(v, t),
        PatternTerm::Term(c) => c == t,
    }
}

/// Left-to-right nested-loop join of the patterns, each lookup bound by the
/// row built so far.
pub fn eval_bgp(ds: &Dataset<'_>, patterns: &[TriplePattern], seed: &Solution) -> Vec<Solution> {
    let mut rows = vec![seed.clone()];
    for pat in patterns {
        let mut next = Vec::new();
        for row in &rows {
            let resolve = |t: &PatternTerm| -> Option<Term> {
                match t {
                    PatternTerm::Term(t) => Some(t.clone()),
                    PatternTerm::Var(v) => row.get(v).cloned(),
                }
            };
            let (s, p, o) = (resolve(&pat.s), resolve(&pat.p), resolve(&pat.o));
            for t in ds.match_terms(s.as_ref(), p.as_ref(), o.as_ref()) {
                let mut r = row.clone();
                if bind_position(&mut r, &pat.s, &t.s) && bind_position(&mut r, &pat.p, &t.p) && bind_position(&mut r, &pat.o, &t.o) {
                    next.push(r);
                }
            }
        }
        rows = next;
        if rows.is_empty() {
            break;
        }
    }
    rows
}
