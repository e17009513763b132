//! Reference evaluators written for clarity, not speed. They share no code
//! with the engine beyond the data types.

use std::collections::{BTreeMap, BTreeSet};

use dscep::engine::{QueryOutput, Solution, Window};
use dscep::kb::PatternTerm;
use dscep::query::{AggregateFn, CompareOp, FilterExpr, Operand, PathModifier, PatternExpr, Query, QueryForm};
use dscep::rdf::{Term, Triple};

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const SUBCLASS: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";
pub const SAME_AS: &str = "http://www.w3.org/2002/07/owl#sameAs";
pub const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
pub const XSD_DECIMAL: &str = "http://www.w3.org/2001/XMLSchema#decimal";

/// Nodes reachable from `start` along `edges` (start included), by DFS.
pub fn reachable(edges: &[(Term, Term)], start: &Term) -> BTreeSet<Term> {
    let mut seen = BTreeSet::from([start.clone()]);
    let mut stack = vec![start.clone()];
    while let Some(n) = stack.pop() {
        for (a, b) in edges {
            if *a == n && seen.insert(b.clone()) {
                stack.push(b.clone());
            }
        }
    }
    seen
}

/// Plain union-find with path halving.
pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

/// sameAs smushing by union-find: every IRI in a link component maps to the
/// component's lexicographically least IRI; the links themselves go away.
pub fn canonicalize(triples: &[Triple]) -> (BTreeMap<Term, Term>, BTreeSet<Triple>) {
    let is_link = |t: &Triple| t.p == Term::iri(SAME_AS) && t.s.is_iri() && t.o.is_iri();
    let mut index: BTreeMap<Term, usize> = BTreeMap::new();
    for t in triples.iter().filter(|t| is_link(t)) {
        for x in [&t.s, &t.o] {
            let n = index.len();
            index.entry(x.clone()).or_insert(n);
        }
    }
    let mut uf = UnionFind::new(index.len());
    for t in triples.iter().filter(|t| is_link(t)) {
        uf.union(index[&t.s], index[&t.o]);
    }
    let mut least: BTreeMap<usize, Term> = BTreeMap::new();
    for (term, &i) in &index {
        let root = uf.find(i);
        let entry = least.entry(root).or_insert_with(|| term.clone());
        if term.value() < entry.value() {
            *entry = term.clone();
        }
    }
    let rep: BTreeMap<Term, Term> = index.iter().map(|(t, &i)| (t.clone(), least[&uf.find(i)].clone())).collect();
    let map = |t: &Term| rep.get(t).cloned().unwrap_or_else(|| t.clone());
    let rewritten = triples.iter().filter(|t| !is_link(t)).map(|t| Triple::new(map(&t.s), map(&t.p), map(&t.o))).collect();
    (rep, rewritten)
}

/// The graph a query sees, fully materialised: window plus canonical KB,
/// typing lifted along the KB subclass closure, subclass statements replaced
/// by the closure (reflexive pairs for hierarchy members) plus whatever
/// subclass edges the window itself carries.
pub fn entailed_graph(window: &[Triple], kb: &[Triple]) -> BTreeSet<Triple> {
    let (_, kb) = canonicalize(kb);
    let ty = Term::iri(RDF_TYPE);
    let sc = Term::iri(SUBCLASS);
    let edges: Vec<(Term, Term)> = kb.iter().filter(|t| t.p == sc).map(|t| (t.s.clone(), t.o.clone())).collect();
    let nodes: BTreeSet<Term> = edges.iter().flat_map(|(a, b)| [a.clone(), b.clone()]).collect();
    let supers = |c: &Term| if nodes.contains(c) { reachable(&edges, c) } else { BTreeSet::from([c.clone()]) };

    let raw: BTreeSet<Triple> = window.iter().cloned().chain(kb.iter().cloned()).collect();
    let mut g = BTreeSet::new();
    for t in &raw {
        if t.p == ty {
            for sup in supers(&t.o) {
                g.insert(Triple::new(t.s.clone(), ty.clone(), sup));
            }
        } else if t.p != sc {
            g.insert(t.clone());
        }
    }
    for a in &nodes {
        for b in supers(a) {
            g.insert(Triple::new(a.clone(), sc.clone(), b));
        }
    }
    g.extend(window.iter().filter(|t| t.p == sc).cloned());
    g
}

pub struct Naive {
    graph: BTreeSet<Triple>,
    domain: Vec<Term>,
}

fn var_of(p: &PatternTerm) -> Option<&str> {
    match p {
        PatternTerm::Var(v) => Some(v),
        PatternTerm::Term(_) => None,
    }
}

fn instantiate(p: &PatternTerm, row: &Solution) -> Option<Term> {
    match p {
        PatternTerm::Term(t) => Some(t.clone()),
        PatternTerm::Var(v) => row.get(v).cloned(),
    }
}

impl Naive {
    pub fn new(window: &Window, kb: &[Triple]) -> Self {
        let triples: Vec<Triple> = window.triples().cloned().collect();
        let graph = entailed_graph(&triples, kb);
        let domain: BTreeSet<Term> = graph.iter().flat_map(|t| [t.s.clone(), t.p.clone(), t.o.clone()]).collect();
        Naive { graph, domain: domain.into_iter().collect() }
    }

    pub fn graph(&self) -> &BTreeSet<Triple> {
        &self.graph
    }

    /// Every assignment of `vars` to domain terms.
    fn assignments(&self, vars: &[String]) -> Vec<Solution> {
        let mut rows = vec![Solution::new()];
        for v in vars {
            let mut next = Vec::with_capacity(rows.len() * self.domain.len());
            for r in &rows {
                for t in &self.domain {
                    let mut r = r.clone();
                    r.insert(v.clone(), t.clone());
                    next.push(r);
                }
            }
            rows = next;
        }
        rows
    }

    fn path_relation(&self, steps: &[dscep::query::PathStep], extra: &BTreeSet<Term>) -> BTreeSet<(Term, Term)> {
        let nodes: BTreeSet<Term> = self.domain.iter().cloned().chain(extra.iter().cloned()).collect();
        let mut rel: Option<BTreeSet<(Term, Term)>> = None;
        for step in steps {
            let edges: BTreeSet<(Term, Term)> =
                self.graph.iter().filter(|t| t.p == step.predicate).map(|t| (t.s.clone(), t.o.clone())).collect();
            let mut r = edges.clone();
            if step.modifier != PathModifier::One {
                loop {
                    let add: Vec<(Term, Term)> = r
                        .iter()
                        .flat_map(|(a, b)| edges.iter().filter(move |(c, _)| c == b).map(move |(_, d)| (a.clone(), d.clone())))
                        .filter(|p| !r.contains(p))
                        .collect();
                    if add.is_empty() {
                        break;
                    }
                    r.extend(add);
                }
            }
            if step.modifier == PathModifier::ZeroOrMore {
                r.extend(nodes.iter().map(|n| (n.clone(), n.clone())));
            }
            rel = Some(match rel {
                None => r,
                Some(prev) => prev
                    .iter()
                    .flat_map(|(a, b)| r.iter().filter(move |(c, _)| c == b).map(move |(_, d)| (a.clone(), d.clone())))
                    .collect(),
            });
        }
        rel.unwrap_or_default()
    }

    pub fn eval(&self, e: &PatternExpr) -> Vec<Solution> {
        match e {
            PatternExpr::Bgp(patterns) => {
                let vars: Vec<String> = patterns
                    .iter()
                    .flat_map(|p| [var_of(&p.s), var_of(&p.p), var_of(&p.o)])
                    .flatten()
                    .map(str::to_string)
                    .collect::<BTreeSet<_>>()
                    .into_iter()
                    .collect();
                self.assignments(&vars)
                    .into_iter()
                    .filter(|row| {
                        patterns.iter().all(|p| {
                            let t = Triple::new(instantiate(&p.s, row).unwrap(), instantiate(&p.p, row).unwrap(), instantiate(&p.o, row).unwrap());
                            self.graph.contains(&t)
                        })
                    })
                    .collect()
            }
            PatternExpr::Path(p) => {
                let consts: BTreeSet<Term> = [&p.s, &p.o].into_iter().filter_map(|x| x.as_term().cloned()).collect();
                let rel = self.path_relation(&p.steps, &consts);
                let vars: Vec<String> =
                    [var_of(&p.s), var_of(&p.o)].into_iter().flatten().map(str::to_string).collect::<BTreeSet<_>>().into_iter().collect();
                self.assignments(&vars)
                    .into_iter()
                    .filter(|row| rel.contains(&(instantiate(&p.s, row).unwrap(), instantiate(&p.o, row).unwrap())))
                    .collect()
            }
            PatternExpr::Filter(f, child) => self.eval(child).into_iter().filter(|r| filter(f, r) == Some(true)).collect(),
            PatternExpr::Join(a, b) => {
                let right = self.eval(b);
                self.eval(a).iter().flat_map(|l| right.iter().filter_map(move |r| merge(l, r))).collect()
            }
            PatternExpr::Union(a, b) => {
                let mut out = self.eval(a);
                out.extend(self.eval(b));
                out
            }
            PatternExpr::Optional(a, b) => {
                let (cond, inner) = match &**b {
                    PatternExpr::Filter(f, c) => (Some(f), &**c),
                    other => (None, other),
                };
                let right = self.eval(inner);
                let mut out = Vec::new();
                for l in self.eval(a) {
                    let matched: Vec<Solution> = right
                        .iter()
                        .filter_map(|r| merge(&l, r))
                        .filter(|m| cond.is_none_or(|f| filter(f, m) == Some(true)))
                        .collect();
                    if matched.is_empty() {
                        out.push(l);
                    } else {
                        out.extend(matched);
                    }
                }
                out
            }
            PatternExpr::Service { .. } => panic!("the naive evaluator has no SERVICE support"),
        }
    }

    pub fn run(&self, q: &Query) -> QueryOutput {
        let mut rows = self.eval(&q.body);
        if let Some(g) = &q.group_by {
            let mut groups: BTreeMap<Vec<Option<Term>>, Vec<Solution>> = BTreeMap::new();
            for r in rows {
                groups.entry(g.vars.iter().map(|v| r.get(v).cloned()).collect()).or_default().push(r);
            }
            if g.vars.is_empty() && groups.is_empty() {
                groups.insert(Vec::new(), Vec::new());
            }
            rows = groups
                .into_iter()
                .map(|(key, members)| {
                    let mut out = Solution::new();
                    for (v, t) in g.vars.iter().zip(key) {
                        if let Some(t) = t {
                            out.insert(v.clone(), t);
                        }
                    }
                    for a in &g.aggregates {
                        let bound: Vec<&Term> = members.iter().filter_map(|m| m.get(&a.arg)).collect();
                        match a.func {
                            AggregateFn::Count => out.insert(a.out.clone(), Term::typed(bound.len().to_string(), XSD_INTEGER)),
                            AggregateFn::Avg => {
                                let nums: Vec<f64> = bound.iter().filter_map(|t| number(t)).collect();
                                if !nums.is_empty() {
                                    let avg = nums.iter().sum::<f64>() / nums.len() as f64;
                                    out.insert(a.out.clone(), Term::typed(format!("{avg:.6}"), XSD_DECIMAL));
                                }
                            }
                        }
                    }
                    out
                })
                .collect();
        }
        match &q.form {
            QueryForm::Select(vars) => QueryOutput::Solutions(
                rows.iter().map(|r| vars.iter().filter_map(|v| r.get(v).map(|t| (v.clone(), t.clone()))).collect()).collect(),
            ),
            QueryForm::Construct(template) => QueryOutput::Construct(
                rows.iter()
                    .filter_map(|r| {
                        template
                            .iter()
                            .map(|p| {
                                let (s, pr, o) = (instantiate(&p.s, r)?, instantiate(&p.p, r)?, instantiate(&p.o, r)?);
                                let well_formed = !matches!(s, Term::Literal(_)) && pr.is_iri();
                                well_formed.then(|| Triple::new(s, pr, o))
                            })
                            .collect::<Option<Vec<_>>>()
                    })
                    .collect(),
            ),
        }
    }
}

fn merge(a: &Solution, b: &Solution) -> Option<Solution> {
    let mut out = a.clone();
    for (k, v) in b.iter() {
        match a.get(k) {
            Some(x) if x != v => return None,
            Some(_) => {}
            None => out.insert(k.to_string(), v.clone()),
        }
    }
    Some(out)
}

fn number(t: &Term) -> Option<f64> {
    let lit = t.as_literal()?;
    matches!(lit.datatype(), Some(XSD_INTEGER | XSD_DECIMAL)).then(|| lit.lexical().parse().ok()).flatten()
}

/// Three-valued: `None` is an evaluation error.
fn filter(f: &FilterExpr, row: &Solution) -> Option<bool> {
    match f {
        FilterExpr::Compare(op, a, b) => {
            let get = |o: &Operand| match o {
                Operand::Var(v) => row.get(v).cloned(),
                Operand::Const(t) => Some(t.clone()),
            };
            let (a, b) = (get(a)?, get(b)?);
            let ord = match (number(&a), number(&b)) {
                (Some(x), Some(y)) => x.partial_cmp(&y)?,
                _ => match op {
                    CompareOp::Eq => return Some(a == b),
                    CompareOp::Ne => return Some(a != b),
                    _ if a.kind() == b.kind() && !matches!(a, Term::Blank(_)) => a.value().cmp(b.value()),
                    _ => return None,
                },
            };
            use std::cmp::Ordering::*;
            Some(match op {
                CompareOp::Eq => ord == Equal,
                CompareOp::Ne => ord != Equal,
                CompareOp::Lt => ord == Less,
                CompareOp::Le => ord != Greater,
                CompareOp::Gt => ord == Greater,
                CompareOp::Ge => ord != Less,
            })
        }
        FilterExpr::And(a, b) => match (filter(a, row), filter(b, row)) {
            (Some(false), _) | (_, Some(false)) => Some(false),
            (Some(true), Some(true)) => Some(true),
            _ => None,
        },
        FilterExpr::Or(a, b) => match (filter(a, row), filter(b, row)) {
            (Some(true), _) | (_, Some(true)) => Some(true),
            (Some(false), Some(false)) => Some(false),
            _ => None,
        },
        FilterExpr::Not(a) => filter(a, row).map(|v| !v),
    }
}

/// Output as a sorted list of strings, for multiset comparison.
pub fn canonical_output(out: &QueryOutput) -> Vec<String> {
    let mut v: Vec<String> = match out {
        QueryOutput::Solutions(rows) => rows.iter().map(|r| r.to_string()).collect(),
        QueryOutput::Construct(groups) => groups
            .iter()
            .map(|g| g.iter().map(|t| format!("{} {} {}", t.s, t.p, t.o)).collect::<Vec<_>>().join(" . "))
            .collect(),
    };
    v.sort();
    v
}
