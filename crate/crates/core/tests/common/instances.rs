//! Small random (query, window, KB) instances over a tiny vocabulary, so the
//! brute-force oracle stays fast.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dscep::engine::Window;
use dscep::kb::{PatternTerm, TriplePattern};
use dscep::query::{Aggregate, AggregateFn, CompareOp, FilterExpr, GroupBy, Operand, PathModifier, PathPattern, PathStep, PatternExpr, Query, QueryForm};
use dscep::rdf::{serialize_ntriple, GraphEvent, Term, Triple};

use super::oracle::{RDF_TYPE, SAME_AS, SUBCLASS, XSD_DECIMAL, XSD_INTEGER};

const EX: &str = "http://ex.org/";

fn ex(name: impl std::fmt::Display) -> Term {
    Term::iri(format!("{EX}{name}"))
}

pub struct Instance {
    pub query: Query,
    pub window: Window,
    pub kb: Vec<Triple>,
}

impl Instance {
    pub fn kb_ntriples(&self) -> String {
        self.kb.iter().map(|t| serialize_ntriple(t) + "\n").collect()
    }
}

struct Vocab {
    entities: Vec<Term>,
    aliases: Vec<Term>,
    classes: Vec<Term>,
    preds: Vec<Term>,
}

impl Vocab {
    fn new() -> Self {
        Vocab {
            entities: (0..4).map(|i| ex(format!("e{i}"))).collect(),
            aliases: (0..2).map(|i| ex(format!("a{i}"))).collect(),
            classes: (0..5).map(|i| ex(format!("C{i}"))).collect(),
            preds: vec![ex("p"), ex("q")],
        }
    }

    fn thing(&self, rng: &mut ChaCha8Rng) -> Term {
        if rng.gen_bool(0.15) { self.aliases.choose(rng) } else { self.entities.choose(rng) }.unwrap().clone()
    }
}

fn number(rng: &mut ChaCha8Rng) -> Term {
    let n = rng.gen_range(0..4);
    if rng.gen_bool(0.5) {
        Term::typed(n.to_string(), XSD_INTEGER)
    } else {
        Term::typed(format!("{n}.5"), XSD_DECIMAL)
    }
}

fn data_triple(v: &Vocab, rng: &mut ChaCha8Rng) -> Triple {
    let s = v.thing(rng);
    match rng.gen_range(0..10) {
        0..=3 => Triple::new(s, v.preds.choose(rng).unwrap().clone(), v.thing(rng)),
        4..=6 => Triple::new(s, Term::iri(RDF_TYPE), v.classes.choose(rng).unwrap().clone()),
        _ => Triple::new(s, ex("val"), number(rng)),
    }
}

fn kb(v: &Vocab, rng: &mut ChaCha8Rng) -> Vec<Triple> {
    let mut kb = Vec::new();
    for i in 0..v.classes.len() {
        for j in i + 1..v.classes.len() {
            if rng.gen_bool(0.3) {
                kb.push(Triple::new(v.classes[i].clone(), Term::iri(SUBCLASS), v.classes[j].clone()));
            }
        }
    }
    for a in &v.aliases {
        if rng.gen_bool(0.6) {
            kb.push(Triple::new(a.clone(), Term::iri(SAME_AS), v.entities.choose(rng).unwrap().clone()));
        }
    }
    for _ in 0..rng.gen_range(5..14) {
        kb.push(data_triple(v, rng));
    }
    kb
}

fn window(v: &Vocab, rng: &mut ChaCha8Rng) -> Window {
    let events = (0..rng.gen_range(1..4))
        .map(|i| {
            let mut triples: Vec<Triple> = (0..rng.gen_range(2..7)).map(|_| data_triple(v, rng)).collect();
            if rng.gen_bool(0.05) {
                triples.push(Triple::new(v.classes[4].clone(), Term::iri(SUBCLASS), v.classes[0].clone()));
            }
            GraphEvent::stamped(format!("g{i}"), triples, 10 + i as i64).unwrap()
        })
        .collect();
    Window::new(0, events)
}

struct QueryGen<'a> {
    v: &'a Vocab,
    vars: [&'static str; 3],
}

impl QueryGen<'_> {
    fn var(&self, rng: &mut ChaCha8Rng) -> PatternTerm {
        PatternTerm::var(*self.vars.choose(rng).unwrap())
    }

    fn subject(&self, rng: &mut ChaCha8Rng) -> PatternTerm {
        if rng.gen_bool(0.8) { self.var(rng) } else { PatternTerm::Term(self.v.thing(rng)) }
    }

    fn pattern(&self, rng: &mut ChaCha8Rng) -> TriplePattern {
        let s = self.subject(rng);
        let (p, o) = match rng.gen_range(0..12) {
            0..=3 => (PatternTerm::Term(self.v.preds.choose(rng).unwrap().clone()), self.subject(rng)),
            4..=6 => (
                PatternTerm::Term(Term::iri(RDF_TYPE)),
                if rng.gen_bool(0.6) { PatternTerm::Term(self.v.classes.choose(rng).unwrap().clone()) } else { self.var(rng) },
            ),
            7 => (PatternTerm::Term(Term::iri(SUBCLASS)), self.var(rng)),
            8..=10 => (PatternTerm::Term(ex("val")), self.var(rng)),
            _ => (self.var(rng), self.var(rng)),
        };
        let s = if p.as_term().is_some_and(|t| t.value() == SUBCLASS) && rng.gen_bool(0.5) {
            PatternTerm::Term(self.v.classes.choose(rng).unwrap().clone())
        } else {
            s
        };
        TriplePattern::new(s, p, o)
    }

    fn path(&self, rng: &mut ChaCha8Rng) -> PathPattern {
        let n = rng.gen_range(1..=3);
        let steps = (0..n)
            .map(|i| {
                let predicate = [Term::iri(RDF_TYPE), Term::iri(SUBCLASS), self.v.preds[0].clone(), self.v.preds[1].clone()]
                    .choose(rng)
                    .unwrap()
                    .clone();
                // A leading zero-length step with both ends open would need the
                // whole graph as its node set; keep it to later steps.
                let modifier = match rng.gen_range(0..3) {
                    0 => PathModifier::One,
                    1 => PathModifier::OneOrMore,
                    _ if i == 0 => PathModifier::One,
                    _ => PathModifier::ZeroOrMore,
                };
                PathStep { predicate, modifier }
            })
            .collect();
        let o = if rng.gen_bool(0.3) { PatternTerm::Term(self.v.classes.choose(rng).unwrap().clone()) } else { self.var(rng) };
        PathPattern { s: self.subject(rng), steps, o }
    }

    fn filter(&self, rng: &mut ChaCha8Rng) -> FilterExpr {
        let op = *[CompareOp::Eq, CompareOp::Ne, CompareOp::Lt, CompareOp::Le, CompareOp::Gt, CompareOp::Ge].choose(rng).unwrap();
        let var = |rng: &mut ChaCha8Rng| Operand::Var(self.vars.choose(rng).unwrap().to_string());
        let base = match rng.gen_range(0..3) {
            0 => FilterExpr::Compare(op, var(rng), Operand::Const(number(rng))),
            1 => FilterExpr::Compare(op, var(rng), var(rng)),
            _ => FilterExpr::Compare(op, var(rng), Operand::Const(self.v.thing(rng))),
        };
        match rng.gen_range(0..8) {
            0 => FilterExpr::Not(Box::new(base)),
            1 => FilterExpr::And(Box::new(base), Box::new(self.filter(rng))),
            2 => FilterExpr::Or(Box::new(base), Box::new(self.filter(rng))),
            _ => base,
        }
    }

    fn expr(&self, rng: &mut ChaCha8Rng, depth: u32) -> PatternExpr {
        let leaf = depth == 0 || rng.gen_bool(0.45);
        if leaf {
            return if rng.gen_bool(0.25) {
                PatternExpr::Path(self.path(rng))
            } else {
                PatternExpr::Bgp((0..rng.gen_range(1..=2)).map(|_| self.pattern(rng)).collect())
            };
        }
        let sub = |rng: &mut ChaCha8Rng| Box::new(self.expr(rng, depth - 1));
        match rng.gen_range(0..4) {
            0 => PatternExpr::Join(sub(rng), sub(rng)),
            1 => PatternExpr::Union(sub(rng), sub(rng)),
            2 => {
                let left = sub(rng);
                let right = sub(rng);
                let right = if rng.gen_bool(0.4) { Box::new(PatternExpr::Filter(self.filter(rng), right)) } else { right };
                PatternExpr::Optional(left, right)
            }
            _ => PatternExpr::Filter(self.filter(rng), sub(rng)),
        }
    }
}

fn query(v: &Vocab, rng: &mut ChaCha8Rng) -> Query {
    let g = QueryGen { v, vars: ["x", "y", "z"] };
    let body = g.expr(rng, 2);
    let mut vars: Vec<String> = g.vars.iter().filter(|_| rng.gen_bool(0.7)).map(|s| s.to_string()).collect();
    if vars.is_empty() {
        vars.push("x".into());
    }
    let (form, group_by) = match rng.gen_range(0..5) {
        0 => {
            let key: Vec<String> = vars.iter().take(rng.gen_range(0..=1)).cloned().collect();
            let func = if rng.gen_bool(0.5) { AggregateFn::Count } else { AggregateFn::Avg };
            let arg = g.vars.choose(rng).unwrap().to_string();
            let mut names = key.clone();
            names.push("agg".into());
            (QueryForm::Select(names), Some(GroupBy { vars: key, aggregates: vec![Aggregate { func, arg, out: "agg".into() }] }))
        }
        1 | 2 => {
            let template = (0..rng.gen_range(1..=2))
                .map(|_| TriplePattern::new(g.var(rng), PatternTerm::Term(ex("out")), g.var(rng)))
                .collect();
            (QueryForm::Construct(template), None)
        }
        _ => (QueryForm::Select(vars), None),
    };
    Query { prefixes: BTreeMap::new(), form, body, group_by }
}

pub fn random_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = Vocab::new();
    let kb = kb(&v, &mut rng);
    let window = window(&v, &mut rng);
    let query = query(&v, &mut rng);
    Instance { query, window, kb }
}

/// A random DAG on up to `max_nodes` classes: edges only go from lower to
/// higher index.
pub fn random_dag(seed: u64, max_nodes: usize) -> (Vec<Term>, Vec<(Term, Term)>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=max_nodes);
    let nodes: Vec<Term> = (0..n).map(|i| ex(format!("K{i}"))).collect();
    let density = rng.gen_range(0.5..3.0) / n as f64;
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(density.min(1.0)) {
                edges.push((nodes[i].clone(), nodes[j].clone()));
            }
        }
    }
    edges.shuffle(&mut rng);
    (nodes, edges)
}

/// Random sameAs links among up to `max_nodes` IRIs plus data triples that
/// mention them.
pub fn random_sameas_graph(seed: u64, max_nodes: usize) -> Vec<Triple> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=max_nodes);
    let nodes: Vec<Term> = (0..n).map(|i| ex(format!("n{:03}", rng.gen_range(0..1000) * 1000 + i))).collect();
    let mut triples = Vec::new();
    for _ in 0..rng.gen_range(1..=n) {
        let (a, b) = (nodes.choose(&mut rng).unwrap(), nodes.choose(&mut rng).unwrap());
        triples.push(Triple::new(a.clone(), Term::iri(SAME_AS), b.clone()));
    }
    for _ in 0..n {
        let s = nodes.choose(&mut rng).unwrap().clone();
        let o = if rng.gen_bool(0.5) { nodes.choose(&mut rng).unwrap().clone() } else { Term::literal("v") };
        triples.push(Triple::new(s, ex("rel"), o));
    }
    triples
}
